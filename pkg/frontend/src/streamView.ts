import { GaplessAudioQueue } from "./audioQueue.js";
import { decodeBase64Pcm16, durationSeconds, PCM_SAMPLE_RATE } from "./pcm.js";
import type { WireFrame } from "./types.js";

export interface StreamCardOptions {
  audioQueue: GaplessAudioQueue;
  /** Developer toggle: render each token in its own span so the 5-token
   * grouping stays visible. Off, groups render as plain text runs. */
  tokenByToken?: boolean;
  document?: Document;
}

export type StreamCardState = "streaming" | "done" | "failed";

/**
 * The live card for one assistant turn: text frames append incrementally,
 * audio frames decode and enqueue gaplessly in arrival order, an error frame
 * shows an inline banner and marks the turn failed, done finalizes the card.
 */
export class TurnStreamCard {
  readonly element: HTMLElement;
  state: StreamCardState = "streaming";
  audioSecondsTotal = 0;
  audioChunks = 0;
  textGroups: string[] = [];

  private readonly doc: Document;
  private readonly textEl: HTMLElement;
  private readonly queue: GaplessAudioQueue;
  private readonly tokenByToken: boolean;

  constructor(container: HTMLElement, options: StreamCardOptions) {
    this.doc = options.document ?? container.ownerDocument;
    this.queue = options.audioQueue;
    this.tokenByToken = options.tokenByToken ?? false;
    this.element = this.doc.createElement("article");
    this.element.className = "turn-card assistant streaming";
    this.textEl = this.doc.createElement("p");
    this.textEl.className = "turn-text";
    this.element.appendChild(this.textEl);
    container.appendChild(this.element);
  }

  get text(): string {
    return this.textGroups.join(" ");
  }

  handleFrame(frame: WireFrame): void {
    switch (frame.kind) {
      case "text":
        this.appendText(frame.text ?? "");
        break;
      case "audio":
        this.enqueueAudio(frame.audio_b64 ?? "");
        break;
      case "error":
        this.fail(frame.text ?? "stream error");
        break;
      case "done":
        this.finalize();
        break;
    }
  }

  private appendText(group: string): void {
    this.textGroups.push(group);
    const span = this.doc.createElement("span");
    span.className = "text-group";
    if (this.tokenByToken) {
      for (const token of group.split(" ")) {
        const t = this.doc.createElement("span");
        t.className = "token";
        t.textContent = token;
        span.appendChild(t);
      }
    } else {
      span.textContent = group;
    }
    if (this.textEl.childNodes.length > 0) {
      this.textEl.appendChild(this.doc.createTextNode(" "));
    }
    this.textEl.appendChild(span);
  }

  private enqueueAudio(b64: string): void {
    const samples = decodeBase64Pcm16(b64);
    this.queue.enqueue(samples);
    this.audioSecondsTotal += durationSeconds(samples, PCM_SAMPLE_RATE);
    this.audioChunks += 1;
    this.element.setAttribute("data-audio-chunks", String(this.audioChunks));
  }

  private fail(message: string): void {
    this.state = "failed";
    const banner = this.doc.createElement("div");
    banner.className = "error-banner";
    banner.textContent = message;
    this.element.appendChild(banner);
    this.element.classList.remove("streaming");
    this.element.classList.add("failed");
  }

  private finalize(): void {
    if (this.state === "streaming") this.state = "done";
    this.element.classList.remove("streaming");
    if (this.state === "done") this.element.classList.add("done");
  }
}
