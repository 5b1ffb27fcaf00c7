// Portable deterministic 64-bit PRNG: xorshift64* (shifts 12, 25, 27;
// multiplier 0x2545F4914F6CDD1D) seeded through one splitmix64 step.
// Floats are (next_u64() >> 11) * 2**-53, uniform in [0, 1).
//
// This is the exact recipe the server engine pins for drip simulation;
// BigInt arithmetic masked to 64 bits reproduces its u64 stream bit for
// bit, which is what makes client-side drips match a server replay.

const MASK = (1n << 64n) - 1n;
const SPLITMIX_GAMMA = 0x9e3779b97f4a7c15n;
const STAR_MULT = 0x2545f4914f6cdd1dn;

export function splitmix64(x: bigint): bigint {
    x = (x + SPLITMIX_GAMMA) & MASK;
    x ^= x >> 30n;
    x = (x * 0xbf58476d1ce4e5b9n) & MASK;
    x ^= x >> 27n;
    x = (x * 0x94d049bb133111ebn) & MASK;
    x ^= x >> 31n;
    return x;
}

export class Xorshift64Star {
    private state: bigint;

    constructor(seed: bigint) {
        let state = splitmix64(seed & MASK);
        if (state === 0n) {
            state = SPLITMIX_GAMMA;
        }
        this.state = state;
    }

    nextU64(): bigint {
        let s = this.state;
        s ^= s >> 12n;
        s = (s ^ (s << 25n)) & MASK;
        s ^= s >> 27n;
        this.state = s;
        return (s * STAR_MULT) & MASK;
    }

    /** Uniform double in [0, 1) with 53 random bits. */
    nextFloat(): number {
        return Number(this.nextU64() >> 11n) * 2 ** -53;
    }

    uniform(lo: number, hi: number): number {
        return lo + (hi - lo) * this.nextFloat();
    }
}

/** Per-stroke drip seed: splitmix64((globalSeed + index) mod 2**64), with
 * the index counted 0-based over all strokes in the session. */
export function deriveStrokeSeed(globalSeed: bigint, strokeIndex: number): bigint {
    return splitmix64((globalSeed + BigInt(strokeIndex)) & MASK);
}
