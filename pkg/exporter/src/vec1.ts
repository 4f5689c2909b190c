/**
 * VEC1 binary vector files.
 *
 * Layout: magic "VEC1", dim as u32 little-endian, count as u64
 * little-endian, then per entry a u16 LE id length, the UTF-8 id bytes
 * and `dim` float32 LE values. This is the contract consumed by the
 * assessment pipeline's vector loader.
 */

export interface Vec1Entry {
  id: string;
  values: Float32Array;
}

export function writeVec1(entries: Vec1Entry[], dim: number): Buffer {
  if (dim < 1) {
    throw new Error(`dim must be positive, got ${dim}`);
  }
  const chunks: Buffer[] = [];
  const header = Buffer.alloc(16);
  header.write("VEC1", 0, "ascii");
  header.writeUInt32LE(dim, 4);
  header.writeBigUInt64LE(BigInt(entries.length), 8);
  chunks.push(header);
  for (const entry of entries) {
    if (entry.values.length !== dim) {
      throw new Error(
        `vector for ${entry.id} has length ${entry.values.length}, expected ${dim}`,
      );
    }
    const idBytes = Buffer.from(entry.id, "utf-8");
    if (idBytes.length > 0xffff) {
      throw new Error(`id ${entry.id} exceeds 65535 bytes`);
    }
    const head = Buffer.alloc(2);
    head.writeUInt16LE(idBytes.length, 0);
    const payload = Buffer.alloc(4 * dim);
    for (let i = 0; i < dim; i++) {
      payload.writeFloatLE(entry.values[i], 4 * i);
    }
    chunks.push(head, idBytes, payload);
  }
  return Buffer.concat(chunks);
}

export function readVec1(data: Buffer): { dim: number; entries: Vec1Entry[] } {
  if (data.length < 16 || data.toString("ascii", 0, 4) !== "VEC1") {
    throw new Error("missing VEC1 magic header");
  }
  const dim = data.readUInt32LE(4);
  const count = Number(data.readBigUInt64LE(8));
  let offset = 16;
  const entries: Vec1Entry[] = [];
  const seen = new Set<string>();
  for (let index = 0; index < count; index++) {
    if (offset + 2 > data.length) {
      throw new Error(`truncated at entry ${index}`);
    }
    const idLen = data.readUInt16LE(offset);
    offset += 2;
    if (offset + idLen + 4 * dim > data.length) {
      throw new Error(`truncated at entry ${index}`);
    }
    const id = data.toString("utf-8", offset, offset + idLen);
    offset += idLen;
    const values = new Float32Array(dim);
    for (let i = 0; i < dim; i++) {
      values[i] = data.readFloatLE(offset + 4 * i);
    }
    offset += 4 * dim;
    if (seen.has(id)) {
      throw new Error(`duplicate id ${id}`);
    }
    seen.add(id);
    entries.push({ id, values });
  }
  if (offset !== data.length) {
    throw new Error(`${data.length - offset} trailing bytes`);
  }
  return { dim, entries };
}
