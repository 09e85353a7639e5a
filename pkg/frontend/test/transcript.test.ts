import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, test } from "vitest";
import {
  TranscriptError,
  complianceReport,
  crossCheckSummary,
  keyReport,
  parseTranscript,
  qssInferenceMismatches,
} from "../src/transcript.js";

const dataDir = join(dirname(fileURLToPath(import.meta.url)), "..", "testdata");
const load = (name: string) => parseTranscript(readFileSync(join(dataDir, name), "utf8"));
const expected = JSON.parse(readFileSync(join(dataDir, "expected.json"), "utf8"));

describe("golden transcripts", () => {
  test("honest facilitated session matches the producer's report", () => {
    const t = load("facilitated_honest.jsonl");
    const want = expected["facilitated_honest.jsonl"];
    expect(t.rounds.length).toBe(want.rounds);
    expect(crossCheckSummary(t)).toEqual([]);
    const compliance = complianceReport(t);
    expect(compliance.controlRounds).toBe(want.control_rounds);
    expect(compliance.compliantRounds).toBe(want.compliant_rounds);
    expect(compliance.complianceRate).toBeCloseTo(want.compliance_rate, 12);
    expect(compliance.verdict).toBe(want.verdict);
    const key = keyReport(t);
    expect(key.aliceKey.length).toBe(want.key_length);
    expect(key.agreementRate).toBe(want.agreement_rate);
  });

  test("random-announcer session is flagged", () => {
    const t = load("facilitated_random_bob.jsonl");
    const want = expected["facilitated_random_bob.jsonl"];
    const compliance = complianceReport(t);
    expect(compliance.verdict).toBe("CheatingSuspected");
    expect(compliance.complianceRate).toBeCloseTo(want.compliance_rate, 12);
    // the announcer only corrupts announced control rounds, so message-mode
    // key material still agrees
    expect(keyReport(t).agreementRate).toBe(1.0);
  });

  test("qss session satisfies the inference table on every accepted round", () => {
    const t = load("qss.jsonl");
    const want = expected["qss.jsonl"];
    expect(t.rounds.length).toBe(want.rounds);
    expect(t.summary.accepted_rounds).toBe(want.accepted_rounds);
    expect(crossCheckSummary(t)).toEqual([]);
    expect(qssInferenceMismatches(t)).toBe(0);
  });
});

describe("validation", () => {
  test("summary is required", () => {
    expect(() => parseTranscript('{"record":"round","round_id":0}\n')).toThrow(TranscriptError);
  });

  test("round ids must be dense", () => {
    const t = load("facilitated_honest.jsonl");
    const lines = readFileSync(join(dataDir, "facilitated_honest.jsonl"), "utf8").split("\n");
    const tampered = [lines[1], ...lines.slice(1)].join("\n");
    expect(() => parseTranscript(tampered)).toThrow(/dense/);
    expect(t.rounds[0].round_id).toBe(0);
  });

  test("summary mismatches are reported", () => {
    const text = readFileSync(join(dataDir, "facilitated_honest.jsonl"), "utf8");
    const tampered = text.replace('"accepted_rounds":612', '"accepted_rounds":611');
    const problems = crossCheckSummary(parseTranscript(tampered));
    expect(problems.length).toBe(1);
    expect(problems[0]).toMatch(/accepted/);
  });

  test("mode and outcomes are type-checked", () => {
    const text = readFileSync(join(dataDir, "facilitated_honest.jsonl"), "utf8");
    const tampered = text.replace('"mode":"Message"', '"mode":"Mystery"');
    expect(() => parseTranscript(tampered)).toThrow(/mode/);
    const badSign = text.replace('"alice_outcome":1,', '"alice_outcome":2,');
    expect(() => parseTranscript(badSign)).toThrow(/alice_outcome/);
  });

  test("compliance needs a facilitated transcript", () => {
    expect(() => complianceReport(load("qss.jsonl"))).toThrow(TranscriptError);
    expect(() => qssInferenceMismatches(load("facilitated_honest.jsonl"))).toThrow(TranscriptError);
  });

  test("verdict follows the threshold-minus-slack rule", () => {
    const t = load("facilitated_honest.jsonl");
    expect(complianceReport(t, 0.75, 0.03).verdict).toBe("Honest");
    expect(complianceReport(t, 0.99, 0).verdict).toBe("CheatingSuspected");
  });
});
