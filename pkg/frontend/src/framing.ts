// wire-v1 framing: 4-byte big-endian length prefix + one UTF-8 JSON object.
// See ../schema/wire-v1.md in the repository root.

export const MAX_FRAME_BYTES = 64 * 1024;

export class FrameError extends Error {}

/** JSON.stringify with recursively sorted object keys (canonical form). */
export function canonicalJson(value: unknown): string {
  if (value === null || typeof value !== "object") return JSON.stringify(value);
  if (Array.isArray(value)) return `[${value.map(canonicalJson).join(",")}]`;
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${canonicalJson(v)}`);
  return `{${entries.join(",")}}`;
}

export function encodeFrame(value: unknown): Buffer {
  const payload = Buffer.from(canonicalJson(value), "utf8");
  if (payload.length > MAX_FRAME_BYTES) {
    throw new FrameError(`frame of ${payload.length} bytes exceeds ${MAX_FRAME_BYTES}`);
  }
  const header = Buffer.alloc(4);
  header.writeUInt32BE(payload.length, 0);
  return Buffer.concat([header, payload]);
}

export function decodeFrame(frame: Buffer): unknown {
  if (frame.length < 4) throw new FrameError("truncated frame: missing length prefix");
  const length = frame.readUInt32BE(0);
  if (length > MAX_FRAME_BYTES) {
    throw new FrameError(`frame of ${length} bytes exceeds ${MAX_FRAME_BYTES}`);
  }
  if (frame.length - 4 !== length) {
    throw new FrameError(`truncated frame: expected ${length} bytes, got ${frame.length - 4}`);
  }
  try {
    return JSON.parse(frame.subarray(4).toString("utf8"));
  } catch (err) {
    throw new FrameError(`malformed frame: ${(err as Error).message}`);
  }
}

/** Incremental decoder for a byte stream carrying consecutive frames. */
export class FrameDecoder {
  private buffer = Buffer.alloc(0);

  push(chunk: Buffer): unknown[] {
    this.buffer = Buffer.concat([this.buffer, chunk]);
    const out: unknown[] = [];
    for (;;) {
      if (this.buffer.length < 4) break;
      const length = this.buffer.readUInt32BE(0);
      if (length > MAX_FRAME_BYTES) {
        throw new FrameError(`frame of ${length} bytes exceeds ${MAX_FRAME_BYTES}`);
      }
      if (this.buffer.length < 4 + length) break;
      const body = this.buffer.subarray(4, 4 + length);
      this.buffer = this.buffer.subarray(4 + length);
      try {
        out.push(JSON.parse(body.toString("utf8")));
      } catch (err) {
        throw new FrameError(`malformed frame: ${(err as Error).message}`);
      }
    }
    return out;
  }

  /** Bytes still waiting for the rest of their frame. */
  pending(): number {
    return this.buffer.length;
  }
}
