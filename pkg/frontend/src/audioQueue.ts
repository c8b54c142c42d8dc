import { PCM_SAMPLE_RATE } from "./pcm.js";

/**
 * Where decoded audio actually goes. The browser implementation wraps an
 * AudioContext; tests inject a fake that records scheduling calls.
 */
export interface AudioSink {
  readonly sampleRate: number;
  readonly currentTime: number;
  schedule(samples: Float32Array, when: number): void;
}

/**
 * Gapless playback queue: each chunk is scheduled to start exactly where the
 * previous one ends (or now, if the queue drained), in arrival order.
 */
export class GaplessAudioQueue {
  private nextStart = 0;
  private enqueuedSeconds = 0;
  private chunks = 0;

  constructor(private readonly sink: AudioSink) {}

  enqueue(samples: Float32Array): number {
    const startAt = Math.max(this.nextStart, this.sink.currentTime);
    this.sink.schedule(samples, startAt);
    const duration = samples.length / this.sink.sampleRate;
    this.nextStart = startAt + duration;
    this.enqueuedSeconds += duration;
    this.chunks += 1;
    return startAt;
  }

  get totalEnqueuedSeconds(): number {
    return this.enqueuedSeconds;
  }

  get chunkCount(): number {
    return this.chunks;
  }

  reset(): void {
    this.nextStart = 0;
    this.enqueuedSeconds = 0;
    this.chunks = 0;
  }
}

/** Real WebAudio sink; only constructed in the browser app, never in tests. */
export function createWebAudioSink(): AudioSink {
  const Ctor =
    (globalThis as { AudioContext?: new (o: { sampleRate: number }) => AudioContext }).AudioContext;
  if (!Ctor) throw new Error("WebAudio is not available in this environment");
  const ctx = new Ctor({ sampleRate: PCM_SAMPLE_RATE });
  return {
    sampleRate: ctx.sampleRate,
    get currentTime() {
      return ctx.currentTime;
    },
    schedule(samples: Float32Array, when: number): void {
      const buffer = ctx.createBuffer(1, samples.length, ctx.sampleRate);
      buffer.getChannelData(0).set(samples);
      const source = ctx.createBufferSource();
      source.buffer = buffer;
      source.connect(ctx.destination);
      source.start(when);
    },
  };
}
