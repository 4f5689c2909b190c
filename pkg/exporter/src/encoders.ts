/**
 * Sentence encoders.
 *
 * `hash`: deterministic feature-hashing encoder, pure integer and IEEE
 * float arithmetic, so exports are byte-identical across runs and
 * machines with no model download. The offline default and the encoder
 * the test suite exercises.
 *
 * Anything else is treated as a pretrained model id and loaded through
 * @xenova/transformers (optional peer dependency): feature extraction
 * with mean pooling over the final layer, normalized, in deterministic
 * inference mode.
 */

export interface Encoder {
  readonly name: string;
  /** Token cap applied to inputs before encoding; null = unlimited. */
  readonly defaultMaxLen: number | null;
  encode(batch: string[][]): Promise<Float32Array[]>;
}

const FNV_OFFSET = 0x811c9dc5;
const FNV_PRIME = 0x01000193;

function fnv1a(text: string): number {
  let hash = FNV_OFFSET;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, FNV_PRIME) >>> 0;
  }
  return hash >>> 0;
}

export function hashEncoder(dim: number): Encoder {
  if (dim < 1) {
    throw new Error(`hash encoder dim must be positive, got ${dim}`);
  }
  return {
    name: `hash-${dim}`,
    defaultMaxLen: null,
    async encode(batch: string[][]): Promise<Float32Array[]> {
      return batch.map((tokens) => {
        const vector = new Float32Array(dim);
        for (const token of tokens) {
          const hash = fnv1a(token);
          const bucket = hash % dim;
          const sign = (hash & 0x80000000) !== 0 ? -1 : 1;
          vector[bucket] += sign;
        }
        let norm = 0;
        for (let i = 0; i < dim; i++) {
          norm += vector[i] * vector[i];
        }
        if (norm === 0) {
          // Tokenized-but-cancelled input; pin to a fixed unit vector so
          // downstream cosine similarity stays defined.
          vector[0] = 1;
          return vector;
        }
        norm = Math.sqrt(norm);
        for (let i = 0; i < dim; i++) {
          vector[i] = vector[i] / norm;
        }
        return vector;
      });
    },
  };
}

export async function transformerEncoder(model: string): Promise<Encoder> {
  let pipelineFactory: (task: string, model: string) => Promise<any>;
  try {
    const transformers = await import("@xenova/transformers");
    pipelineFactory = transformers.pipeline as typeof pipelineFactory;
  } catch (error) {
    throw new Error(
      `encoder ${model} needs the optional @xenova/transformers package: ${error}`,
    );
  }
  const extractor = await pipelineFactory("feature-extraction", model);
  return {
    name: model,
    defaultMaxLen: 512,
    async encode(batch: string[][]): Promise<Float32Array[]> {
      const texts = batch.map((tokens) => tokens.join(" "));
      const output = await extractor(texts, { pooling: "mean", normalize: true });
      const flat = output.data as Float32Array;
      const dim = flat.length / texts.length;
      return texts.map((_, i) => flat.slice(i * dim, (i + 1) * dim));
    },
  };
}

export async function makeEncoder(name: string, hashDim: number): Promise<Encoder> {
  if (name === "hash") {
    return hashEncoder(hashDim);
  }
  return transformerEncoder(name);
}
