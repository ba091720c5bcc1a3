/** Decoding of the service's base64 PCM16 little-endian audio blocks. */

const PCM16_SCALE = 32767;

/** base64 -> bytes, working in both browser (atob) and Node (Buffer). */
export function base64ToBytes(b64: string): Uint8Array {
  if (typeof atob === "function") {
    const binary = atob(b64);
    const bytes = new Uint8Array(binary.length);
    for (let i = 0; i < binary.length; i++) {
      bytes[i] = binary.charCodeAt(i);
    }
    return bytes;
  }
  return new Uint8Array(Buffer.from(b64, "base64"));
}

/** PCM16LE bytes -> float samples in [-1, 1]. */
export function decodePcm16(bytes: Uint8Array): Float32Array {
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const n = Math.floor(bytes.byteLength / 2);
  const out = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    out[i] = view.getInt16(2 * i, true) / PCM16_SCALE;
  }
  return out;
}

export function decodeAudioData(b64: string): Float32Array {
  return decodePcm16(base64ToBytes(b64));
}
