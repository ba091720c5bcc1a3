/**
 * Gapless scheduling of streamed PCM blocks.
 *
 * Blocks are queued back to back on the output clock; a small lead
 * buffer absorbs network jitter.  The player tracks the statistics the
 * UI surfaces: sequence gaps, underruns (the schedule ran dry and had
 * to re-anchor), and current buffer depth.
 */

export interface AudioOut {
  readonly sampleRate: number;
  currentTime(): number;
  schedule(frames: Float32Array, when: number): void;
}

export interface PlayerStats {
  blocksReceived: number;
  seqGaps: number;
  underruns: number;
  bufferedSeconds: number;
}

export class PcmPlayer {
  private nextTime = 0;
  private lastSeq: number | null = null;
  private stats_: PlayerStats = {
    blocksReceived: 0,
    seqGaps: 0,
    underruns: 0,
    bufferedSeconds: 0,
  };

  constructor(
    private readonly out: AudioOut,
    private readonly leadSeconds = 0.04,
  ) {}

  push(seq: number, frames: Float32Array): void {
    if (this.lastSeq !== null && seq !== this.lastSeq + 1) {
      this.stats_.seqGaps += 1;
    }
    this.lastSeq = seq;

    const now = this.out.currentTime();
    if (this.nextTime <= now) {
      // schedule ran dry (or first block): re-anchor with the jitter lead
      if (this.stats_.blocksReceived > 0) {
        this.stats_.underruns += 1;
      }
      this.nextTime = now + this.leadSeconds;
    }
    this.out.schedule(frames, this.nextTime);
    this.nextTime += frames.length / this.out.sampleRate;
    this.stats_.blocksReceived += 1;
    this.stats_.bufferedSeconds = Math.max(0, this.nextTime - this.out.currentTime());
  }

  reset(): void {
    this.lastSeq = null;
    this.nextTime = 0;
  }

  get stats(): PlayerStats {
    return {
      ...this.stats_,
      bufferedSeconds: Math.max(0, this.nextTime - this.out.currentTime()),
    };
  }
}

/** WebAudio-backed output for the browser. */
export class WebAudioOut implements AudioOut {
  readonly sampleRate: number;

  constructor(private readonly ctx: AudioContext) {
    this.sampleRate = ctx.sampleRate;
  }

  currentTime(): number {
    return this.ctx.currentTime;
  }

  schedule(frames: Float32Array, when: number): void {
    const buffer = this.ctx.createBuffer(1, frames.length, this.sampleRate);
    buffer.getChannelData(0).set(frames);
    const source = this.ctx.createBufferSource();
    source.buffer = buffer;
    source.connect(this.ctx.destination);
    source.start(when);
  }
}
