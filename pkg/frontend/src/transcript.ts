// transcript-v1 parsing and derived statistics.
// See ../schema/transcript-v1.md in the repository root.

export interface RoundRecord {
  record: "round";
  round_id: number;
  mode: "Message" | "Control" | "Unresolved";
  accepted: boolean;
  alice_basis: string;
  bob_basis: string;
  charlie_basis: string | null;
  alice_outcome: number | null;
  bob_outcome: number | null;
  charlie_outcome: string | null;
  charlie_sign: number | null;
}

export interface TranscriptSummary {
  record: "summary";
  version: string;
  protocol: "facilitated" | "qss";
  params: Record<string, unknown>;
  rounds: number;
  accepted_rounds: number;
  complete: boolean;
  message_rounds?: number;
  control_rounds?: number;
}

export interface Transcript {
  rounds: RoundRecord[];
  summary: TranscriptSummary;
}

export class TranscriptError extends Error {}

function fail(line: number, msg: string): never {
  throw new TranscriptError(`line ${line}: ${msg}`);
}

function asRound(obj: Record<string, unknown>, line: number): RoundRecord {
  const need = (key: string) => {
    if (!(key in obj)) fail(line, `round record missing ${key}`);
    return obj[key];
  };
  const sign = (key: string): number | null => {
    const v = need(key);
    if (v === null) return null;
    if (v !== 1 && v !== -1) fail(line, `${key} must be 1, -1 or null`);
    return v as number;
  };
  const round_id = need("round_id");
  if (typeof round_id !== "number") fail(line, "round_id must be a number");
  const mode = need("mode");
  if (mode !== "Message" && mode !== "Control" && mode !== "Unresolved") {
    fail(line, `unknown mode ${String(mode)}`);
  }
  return {
    record: "round",
    round_id: round_id as number,
    mode,
    accepted: Boolean(need("accepted")),
    alice_basis: String(need("alice_basis")),
    bob_basis: String(need("bob_basis")),
    charlie_basis: need("charlie_basis") as string | null,
    alice_outcome: sign("alice_outcome"),
    bob_outcome: sign("bob_outcome"),
    charlie_outcome: need("charlie_outcome") as string | null,
    charlie_sign: sign("charlie_sign"),
  };
}

export function parseTranscript(text: string): Transcript {
  const rounds: RoundRecord[] = [];
  let summary: TranscriptSummary | null = null;
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      fail(i + 1, `not JSON: ${(err as Error).message}`);
    }
    if (typeof obj !== "object" || obj === null) fail(i + 1, "not an object");
    const rec = obj as Record<string, unknown>;
    if (rec.record === "summary") {
      if (summary !== null) fail(i + 1, "duplicate summary record");
      summary = rec as unknown as TranscriptSummary;
    } else if (rec.record === "round") {
      if (summary !== null) fail(i + 1, "round record after the summary");
      rounds.push(asRound(rec, i + 1));
    } else {
      fail(i + 1, `unknown record kind ${String(rec.record)}`);
    }
  }
  if (summary === null) throw new TranscriptError("transcript has no summary line");
  rounds.forEach((r, i) => {
    if (r.round_id !== i) throw new TranscriptError(`round ids not dense at index ${i}`);
  });
  return { rounds, summary };
}

export interface ComplianceReport {
  controlRounds: number;
  compliantRounds: number;
  complianceRate: number | null;
  threshold: number;
  slack: number;
  verdict: "Honest" | "CheatingSuspected" | "Indeterminate";
}

/** Control rounds comply when the outcome product is +1 in Z and -1 in X. */
export function complianceReport(t: Transcript, threshold = 0.75, slack = 0.03): ComplianceReport {
  if (t.summary.protocol !== "facilitated") {
    throw new TranscriptError("compliance applies to facilitated transcripts");
  }
  let control = 0;
  let compliant = 0;
  for (const r of t.rounds) {
    if (!r.accepted || r.mode !== "Control") continue;
    if (r.alice_outcome === null || r.bob_outcome === null) {
      throw new TranscriptError(`accepted control round ${r.round_id} lacks outcomes`);
    }
    control += 1;
    const product = r.alice_outcome * r.bob_outcome;
    const target = r.alice_basis === "Z" ? 1 : -1;
    if (product === target) compliant += 1;
  }
  if (control === 0) {
    return { controlRounds: 0, compliantRounds: 0, complianceRate: null, threshold, slack, verdict: "Indeterminate" };
  }
  const rate = compliant / control;
  return {
    controlRounds: control,
    compliantRounds: compliant,
    complianceRate: rate,
    threshold,
    slack,
    verdict: rate >= threshold - slack ? "Honest" : "CheatingSuspected",
  };
}

export interface KeyReport {
  aliceKey: string;
  bobKey: string;
  agreementRate: number | null;
}

/** Accepted message rounds: +1 -> bit 0, -1 -> bit 1; bob flips on Z rounds. */
export function keyReport(t: Transcript): KeyReport {
  if (t.summary.protocol !== "facilitated") {
    throw new TranscriptError("key extraction applies to facilitated transcripts");
  }
  let alice = "";
  let bob = "";
  let agree = 0;
  for (const r of t.rounds) {
    if (!r.accepted || r.mode !== "Message") continue;
    if (r.alice_outcome === null || r.bob_outcome === null) {
      throw new TranscriptError(`accepted message round ${r.round_id} lacks outcomes`);
    }
    const aBit = r.alice_outcome === 1 ? 0 : 1;
    let bBit = r.bob_outcome === 1 ? 0 : 1;
    if (r.bob_basis === "Z") bBit = 1 - bBit;
    alice += aBit;
    bob += bBit;
    if (aBit === bBit) agree += 1;
  }
  return {
    aliceKey: alice,
    bobKey: bob,
    agreementRate: alice.length ? agree / alice.length : null,
  };
}

// Recipient-measurement inference table for the entanglement-based scheme:
// (bob basis+sign, charlie basis+sign) -> dealer basis+sign.
const QSS_TABLE: Record<string, string> = {
  "X+1|X+1": "X+1", "X+1|X-1": "X-1", "X+1|Y+1": "Y-1", "X+1|Y-1": "Y+1",
  "X-1|X+1": "X-1", "X-1|X-1": "X+1", "X-1|Y+1": "Y+1", "X-1|Y-1": "Y-1",
  "Y+1|X+1": "Y-1", "Y+1|X-1": "Y+1", "Y+1|Y+1": "X-1", "Y+1|Y-1": "X+1",
  "Y-1|X+1": "Y+1", "Y-1|X-1": "Y-1", "Y-1|Y+1": "X+1", "Y-1|Y-1": "X-1",
};

const fmtSign = (n: number) => (n >= 0 ? `+${n}` : `${n}`);

/** Number of accepted rounds whose dealer result contradicts the table. */
export function qssInferenceMismatches(t: Transcript): number {
  if (t.summary.protocol !== "qss") {
    throw new TranscriptError("inference checking applies to qss transcripts");
  }
  let bad = 0;
  for (const r of t.rounds) {
    if (!r.accepted) continue;
    if (r.bob_outcome === null || r.alice_outcome === null || r.charlie_sign === null || r.charlie_basis === null) {
      throw new TranscriptError(`accepted round ${r.round_id} lacks results`);
    }
    const key = `${r.bob_basis}${fmtSign(r.bob_outcome)}|${r.charlie_basis}${fmtSign(r.charlie_sign)}`;
    const inferred = QSS_TABLE[key];
    if (!inferred) throw new TranscriptError(`round ${r.round_id}: no table cell for ${key}`);
    if (inferred !== `${r.alice_basis}${fmtSign(r.alice_outcome)}`) bad += 1;
  }
  return bad;
}

/** Consistency failures between the rounds and the summary line. */
export function crossCheckSummary(t: Transcript): string[] {
  const problems: string[] = [];
  const s = t.summary;
  if (s.version !== "transcript-v1") problems.push(`unknown version ${s.version}`);
  if (s.rounds !== t.rounds.length) {
    problems.push(`summary says ${s.rounds} rounds, file has ${t.rounds.length}`);
  }
  const accepted = t.rounds.filter((r) => r.accepted).length;
  if (s.accepted_rounds !== accepted) {
    problems.push(`summary says ${s.accepted_rounds} accepted rounds, recomputed ${accepted}`);
  }
  if (s.protocol === "facilitated") {
    const message = t.rounds.filter((r) => r.mode === "Message").length;
    const control = t.rounds.filter((r) => r.mode === "Control").length;
    if (s.message_rounds !== message) problems.push(`message_rounds ${s.message_rounds} != ${message}`);
    if (s.control_rounds !== control) problems.push(`control_rounds ${s.control_rounds} != ${control}`);
  }
  return problems;
}
