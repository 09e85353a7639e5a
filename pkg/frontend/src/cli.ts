#!/usr/bin/env node
// Validate a transcript file and print its recomputed statistics.
// Usage: qtriad-report <transcript.jsonl> [--threshold 0.75] [--slack 0.03]
// Exit codes: 0 ok, 1 cross-check failure, 2 usage error.

import { readFileSync } from "node:fs";
import {
  complianceReport,
  crossCheckSummary,
  keyReport,
  parseTranscript,
  qssInferenceMismatches,
} from "./transcript.js";

function main(argv: string[]): number {
  const args = [...argv];
  let threshold = 0.75;
  let slack = 0.03;
  const positional: string[] = [];
  while (args.length) {
    const arg = args.shift()!;
    if (arg === "--threshold") threshold = Number(args.shift());
    else if (arg === "--slack") slack = Number(args.shift());
    else positional.push(arg);
  }
  if (positional.length !== 1 || Number.isNaN(threshold) || Number.isNaN(slack)) {
    console.error("usage: qtriad-report <transcript.jsonl> [--threshold T] [--slack S]");
    return 2;
  }

  const transcript = parseTranscript(readFileSync(positional[0], "utf8"));
  const s = transcript.summary;
  console.log(`protocol        : ${s.protocol}`);
  console.log(`rounds          : ${s.rounds} (complete: ${s.complete})`);
  console.log(`accepted rounds : ${s.accepted_rounds}`);
  console.log(`params          : ${JSON.stringify(s.params)}`);

  let failures = crossCheckSummary(transcript);
  if (s.protocol === "facilitated") {
    const compliance = complianceReport(transcript, threshold, slack);
    const rate = compliance.complianceRate === null ? "n/a" : compliance.complianceRate.toFixed(4);
    console.log(`control rounds  : ${compliance.controlRounds}`);
    console.log(`compliance rate : ${rate} (threshold ${threshold} - slack ${slack})`);
    console.log(`verdict         : ${compliance.verdict}`);
    const key = keyReport(transcript);
    const agreement = key.agreementRate === null ? "n/a" : key.agreementRate.toFixed(4);
    console.log(`key bits        : ${key.aliceKey.length}, agreement ${agreement}`);
  } else {
    const mismatches = qssInferenceMismatches(transcript);
    console.log(`inference check : ${mismatches} mismatching accepted rounds`);
    if (mismatches > 0) failures = failures.concat(`${mismatches} inference mismatches`);
  }

  for (const problem of failures) console.error(`CHECK FAILED: ${problem}`);
  console.log(failures.length ? "transcript INVALID" : "transcript OK");
  return failures.length ? 1 : 0;
}

process.exit(main(process.argv.slice(2)));
