// Audio frames carry 16-bit little-endian mono PCM, base64-encoded.

export const PCM_SAMPLE_RATE = 24_000;

export function decodeBase64Pcm16(b64: string): Float32Array {
  const binary = atob(b64);
  const n = binary.length >> 1;
  const out = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    const lo = binary.charCodeAt(2 * i);
    const hi = binary.charCodeAt(2 * i + 1);
    let value = (hi << 8) | lo;
    if (value >= 0x8000) value -= 0x10000;
    out[i] = value / 32768;
  }
  return out;
}

export function durationSeconds(samples: Float32Array, sampleRate = PCM_SAMPLE_RATE): number {
  return samples.length / sampleRate;
}
