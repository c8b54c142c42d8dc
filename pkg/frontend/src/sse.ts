import type { WireFrame } from "./types.js";

/**
 * Incremental server-sent-event parser for the frame stream.
 *
 * Network reads can split an event anywhere; feed() buffers partial blocks
 * and returns only fully delimited frames, in arrival order.
 */
export class SseParser {
  private buffer = "";

  feed(chunk: string): WireFrame[] {
    this.buffer += chunk;
    const frames: WireFrame[] = [];
    let sep: number;
    while ((sep = this.buffer.indexOf("\n\n")) !== -1) {
      const block = this.buffer.slice(0, sep);
      this.buffer = this.buffer.slice(sep + 2);
      const frame = parseBlock(block);
      if (frame) frames.push(frame);
    }
    return frames;
  }

  /** Unconsumed partial input; empty after a well-terminated stream. */
  get pending(): string {
    return this.buffer;
  }
}

function parseBlock(block: string): WireFrame | null {
  let event = "";
  const dataLines: string[] = [];
  for (const line of block.split("\n")) {
    if (line.startsWith(":")) continue; // comment / keepalive
    if (line.startsWith("event:")) event = line.slice("event:".length).trim();
    else if (line.startsWith("data:")) dataLines.push(line.slice("data:".length).trim());
  }
  if (event !== "frame" || dataLines.length === 0) return null;
  return JSON.parse(dataLines.join("\n")) as WireFrame;
}
