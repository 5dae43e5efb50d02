"""Baseline Huffman entropy coding of quantized blocks.

Blocks are handled as (n, 64) integer arrays in zigzag order, listed in scan
order (the order they appear in the bitstream). The encoder is vectorized
with numpy; the decoder is a compiled sequential loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import JpegEncodeError, JpegParseError
from .huffman import HuffmanTable

MAX_AC = 1023
MAX_DC = 2047


def size_category(values: np.ndarray) -> np.ndarray:
    """Number of magnitude bits needed for each value (0 for zero)."""
    mag = np.abs(np.asarray(values, dtype=np.int64))
    out = np.zeros(mag.shape, dtype=np.int64)
    nz = mag > 0
    out[nz] = np.floor(np.log2(mag[nz])).astype(np.int64) + 1
    return out


def magnitude_bits(values: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Two's-complement-minus-one form used for negative amplitudes."""
    values = np.asarray(values, dtype=np.int64)
    return np.where(values < 0, values + (np.int64(1) << sizes) - 1, values)


@dataclass
class ScanComponent:
    """How one component is coded inside a scan."""

    blocks: np.ndarray  # (n, 64) zigzag-ordered, in scan order
    dc_table: HuffmanTable
    ac_table: HuffmanTable


def block_symbols(zz: np.ndarray, comp_index: np.ndarray, n_components: int):
    """Symbols and amplitudes for a sequence of zigzag blocks.

    Returns parallel arrays (block, order, is_ac, symbol, amplitude, amp_size)
    sorted into bitstream order.
    """
    zz = np.asarray(zz, dtype=np.int64)
    n = zz.shape[0]
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty, empty, empty
    ac = zz[:, 1:]
    if np.abs(ac).max(initial=0) > MAX_AC:
        raise JpegEncodeError(f"AC coefficient outside [-{MAX_AC}, {MAX_AC}]")
    dc = zz[:, 0]
    if np.abs(dc).max(initial=0) > MAX_DC:
        raise JpegEncodeError(f"DC coefficient outside [-{MAX_DC}, {MAX_DC}]")

    # DC differences against the previous block of the same component
    diff = np.empty(n, dtype=np.int64)
    for c in range(n_components):
        idx = np.flatnonzero(comp_index == c)
        if idx.size:
            diff[idx] = np.diff(dc[idx], prepend=0)
    if np.abs(diff).max(initial=0) > MAX_DC:
        raise JpegEncodeError("DC difference does not fit in 11 bits")
    dc_size = size_category(diff)

    blocks_l = [np.arange(n)]
    order_l = [np.zeros(n, dtype=np.int64)]
    isac_l = [np.zeros(n, dtype=np.int64)]
    sym_l = [dc_size]
    amp_l = [magnitude_bits(diff, dc_size)]
    asz_l = [dc_size]

    b, k = np.nonzero(ac)
    k = k + 1  # zigzag position 1..63
    prev = np.zeros_like(k)
    if k.size:
        same = np.r_[False, b[1:] == b[:-1]]
        prev[same] = k[:-1][same[1:]]
    run = k - prev - 1
    vals = ac[b, k - 1]
    sizes = size_category(vals)
    # each coefficient sorts after any ZRLs emitted for its run
    order = k * 4 + 2
    blocks_l.append(b)
    order_l.append(order)
    isac_l.append(np.ones_like(b))
    sym_l.append((run % 16) * 16 + sizes)
    amp_l.append(magnitude_bits(vals, sizes))
    asz_l.append(sizes)

    nzrl = run // 16
    if nzrl.any():
        owner = np.repeat(np.arange(b.size), nzrl)
        # distinct increasing keys below the coefficient's own key
        within = np.arange(owner.size) - np.repeat(np.cumsum(nzrl) - nzrl, nzrl)
        blocks_l.append(b[owner])
        order_l.append(k[owner] * 4 - 3 + within)
        isac_l.append(np.ones_like(owner))
        sym_l.append(np.full(owner.size, 0xF0, dtype=np.int64))
        amp_l.append(np.zeros(owner.size, dtype=np.int64))
        asz_l.append(np.zeros(owner.size, dtype=np.int64))

    last = np.zeros(n, dtype=np.int64)
    if b.size:
        last_k = np.zeros(n, dtype=np.int64)
        np.maximum.at(last_k, b, k)
        last = last_k
    eob = np.flatnonzero(last < 63)
    blocks_l.append(eob)
    order_l.append(np.full(eob.size, 1000, dtype=np.int64))
    isac_l.append(np.ones_like(eob))
    sym_l.append(np.zeros(eob.size, dtype=np.int64))
    amp_l.append(np.zeros(eob.size, dtype=np.int64))
    asz_l.append(np.zeros(eob.size, dtype=np.int64))

    blocks = np.concatenate(blocks_l)
    order = np.concatenate(order_l)
    perm = np.lexsort((order, blocks))
    return (
        blocks[perm],
        order[perm],
        np.concatenate(isac_l)[perm],
        np.concatenate(sym_l)[perm],
        np.concatenate(amp_l)[perm],
        np.concatenate(asz_l)[perm],
    )


def pack_bits(values: np.ndarray, lengths: np.ndarray) -> bytes:
    """Concatenate variable-length big-endian codes, pad with 1s, stuff 0xFF."""
    values = np.asarray(values, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    keep = lengths > 0
    values, lengths = values[keep], lengths[keep]
    total = int(lengths.sum())
    if total == 0:
        return b""
    owner = np.repeat(np.arange(values.size), lengths)
    starts = np.cumsum(lengths) - lengths
    shift = lengths[owner] - 1 - (np.arange(total) - starts[owner])
    bits = ((values[owner] >> shift) & 1).astype(np.uint8)
    pad = -total % 8
    if pad:
        bits = np.concatenate([bits, np.ones(pad, dtype=np.uint8)])
    raw = np.packbits(bits)
    ff = np.flatnonzero(raw == 0xFF)
    if ff.size:
        raw = np.insert(raw, ff + 1, 0)
    return raw.tobytes()


def encode_scan(components: list[ScanComponent], mcu_pattern: list[int]) -> bytes:
    """Entropy-code interleaved blocks.

    ``mcu_pattern`` lists, per block inside one MCU, which component it
    belongs to (e.g. [0, 0, 0, 0, 1, 2] for 4:2:0). Each component's
    ``blocks`` must already be in the order it is consumed by successive MCUs.
    """
    pattern = np.asarray(mcu_pattern, dtype=np.int64)
    per_mcu = np.bincount(pattern, minlength=len(components))
    n_mcu = None
    for c, comp in enumerate(components):
        count = comp.blocks.shape[0] // per_mcu[c]
        if comp.blocks.shape[0] != count * per_mcu[c]:
            raise JpegEncodeError(f"component {c} block count is not a whole number of MCUs")
        if n_mcu is None:
            n_mcu = count
        elif n_mcu != count:
            raise JpegEncodeError("components disagree on the number of MCUs")
    # interleave: MCU m holds, for each pattern slot, the next block of that component
    slot_rank = np.zeros(pattern.size, dtype=np.int64)
    for c in range(len(components)):
        where = np.flatnonzero(pattern == c)
        slot_rank[where] = np.arange(where.size)
    comp_index = np.tile(pattern, n_mcu)
    mcu_index = np.repeat(np.arange(n_mcu), pattern.size)
    src_index = mcu_index * per_mcu[comp_index] + np.tile(slot_rank, n_mcu)
    zz = np.empty((comp_index.size, 64), dtype=np.int64)
    for c, comp in enumerate(components):
        sel = comp_index == c
        zz[sel] = comp.blocks[src_index[sel]]

    blk, _, is_ac, sym, amp, asz = block_symbols(zz, comp_index, len(components))
    comp_of = comp_index[blk]
    code = np.zeros(sym.size, dtype=np.int64)
    clen = np.zeros(sym.size, dtype=np.int64)
    for c, comp in enumerate(components):
        for flag, table in ((0, comp.dc_table), (1, comp.ac_table)):
            sel = (comp_of == c) & (is_ac == flag)
            if not sel.any():
                continue
            tcode, tsize = table.code_arrays()
            s = sym[sel]
            if (tsize[s] == 0).any():
                missing = int(s[tsize[s] == 0][0])
                raise JpegEncodeError(
                    f"symbol 0x{missing:02X} missing from {table.table_class.upper()} table {table.table_id}"
                )
            code[sel] = tcode[s]
            clen[sel] = tsize[s]
    values = (code << asz) | (amp & ((np.int64(1) << asz) - 1))
    return pack_bits(values, clen + asz)


# --- decoding ---------------------------------------------------------------

ERR_OK = 0
ERR_TRUNCATED = 1
ERR_BAD_CODE = 2
ERR_RUN_PAST_END = 3
ERR_BAD_RESTART = 4
ERR_BAD_SIZE = 5

_ERROR_TEXT = {
    ERR_TRUNCATED: "entropy-coded data ends mid-block",
    ERR_BAD_CODE: "invalid Huffman code",
    ERR_RUN_PAST_END: "AC run extends past the end of the block",
    ERR_BAD_RESTART: "expected restart marker not found",
    ERR_BAD_SIZE: "coefficient size category out of range",
}


@numba.njit(cache=True, nogil=True)
def _decode_kernel(
    data, start, end, n_mcu_x, n_mcu_y, comp_h, comp_v, comp_bw, comp_bh, comp_offset,
    comp_dc, comp_ac, lut_len, lut_sym, restart_interval, out,
):
    # bit reader state
    pos = start
    acc = np.uint64(0)
    nbits = 0
    real_bits = 0  # bits in acc that came from the stream (rest are zero fill)
    n_comp = comp_h.shape[0]
    pred = np.zeros(n_comp, dtype=np.int64)
    single = n_comp == 1
    mcu_count = n_mcu_x * n_mcu_y
    rst_expected = 0
    for m in range(mcu_count):
        if restart_interval > 0 and m > 0 and m % restart_interval == 0:
            # discard partial byte, require RSTn
            acc = np.uint64(0)
            nbits = 0
            real_bits = 0
            while pos + 2 < end and data[pos] == 0xFF and data[pos + 1] == 0xFF:
                pos += 1
            if pos + 1 >= end or data[pos] != 0xFF or data[pos + 1] != 0xD0 + rst_expected:
                return ERR_BAD_RESTART, pos
            pos += 2
            rst_expected = (rst_expected + 1) & 7
            for c in range(n_comp):
                pred[c] = 0
        my = m // n_mcu_x
        mx = m % n_mcu_x
        for c in range(n_comp):
            hv = 1 if single else comp_h[c]
            vv = 1 if single else comp_v[c]
            for by in range(vv):
                for bx in range(hv):
                    row = my * vv + by
                    col = mx * hv + bx
                    dst = comp_offset[c] + row * comp_bw[c] + col
                    dct = comp_dc[c]
                    act = comp_ac[c]
                    k = 0
                    while k < 64:
                        t = dct if k == 0 else act
                        # refill to at least 32 bits
                        while nbits <= 56:
                            byte = 0
                            got = False
                            if pos < end:
                                b = data[pos]
                                if b == 0xFF:
                                    nxt = data[pos + 1] if pos + 1 < end else 0xFF
                                    if nxt == 0x00:
                                        byte = 0xFF
                                        got = True
                                        pos += 2
                                else:
                                    byte = b
                                    got = True
                                    pos += 1
                            acc = acc | (np.uint64(byte) << np.uint64(56 - nbits))
                            nbits += 8
                            if got:
                                real_bits += 8
                            else:
                                break
                        peek = int(acc >> np.uint64(48))
                        length = lut_len[t, peek]
                        if length == 0:
                            if real_bits < 16:
                                return ERR_TRUNCATED, pos
                            return ERR_BAD_CODE, pos
                        if length > real_bits:
                            return ERR_TRUNCATED, pos
                        sym = lut_sym[t, peek]
                        acc = acc << np.uint64(length)
                        nbits -= length
                        real_bits -= length
                        if k == 0:
                            size = sym
                            if size > 11:
                                return ERR_BAD_SIZE, pos
                        else:
                            size = sym & 15
                            run = sym >> 4
                            if size == 0:
                                if run == 15:
                                    k += 16
                                    if k > 64:
                                        return ERR_RUN_PAST_END, pos
                                    continue
                                break  # EOB
                            if size > 10:
                                return ERR_BAD_SIZE, pos
                            k += run
                            if k > 63:
                                return ERR_RUN_PAST_END, pos
                        val = 0
                        if size > 0:
                            # the magnitude bits may need another refill
                            while nbits <= 56:
                                byte = 0
                                got = False
                                if pos < end:
                                    b = data[pos]
                                    if b == 0xFF:
                                        nxt = data[pos + 1] if pos + 1 < end else 0xFF
                                        if nxt == 0x00:
                                            byte = 0xFF
                                            got = True
                                            pos += 2
                                    else:
                                        byte = b
                                        got = True
                                        pos += 1
                                acc = acc | (np.uint64(byte) << np.uint64(56 - nbits))
                                nbits += 8
                                if got:
                                    real_bits += 8
                                else:
                                    break
                            if size > real_bits:
                                return ERR_TRUNCATED, pos
                            raw = int(acc >> np.uint64(64 - size))
                            acc = acc << np.uint64(size)
                            nbits -= size
                            real_bits -= size
                            if raw < (1 << (size - 1)):
                                val = raw - (1 << size) + 1
                            else:
                                val = raw
                        if k == 0:
                            pred[c] += val
                            out[dst, 0] = pred[c]
                        else:
                            out[dst, k] = val
                        k += 1
    # bytes still buffered were read ahead; report where real data stopped
    return ERR_OK, pos - real_bits // 8


@dataclass
class DecodeComponent:
    h: int
    v: int
    blocks_w: int
    blocks_h: int
    dc_table: HuffmanTable
    ac_table: HuffmanTable


def decode_scan(
    data: bytes | np.ndarray,
    start: int,
    end: int,
    components: list[DecodeComponent],
    n_mcu_x: int,
    n_mcu_y: int,
    restart_interval: int = 0,
) -> list[np.ndarray]:
    """Decode one scan into per-component (blocks_h, blocks_w, 64) zigzag arrays.

    For a single-component scan the MCU grid is that component's own block
    grid; otherwise every MCU holds h*v blocks of each component.
    """
    buf = np.frombuffer(bytes(data), dtype=np.uint8) if not isinstance(data, np.ndarray) else data
    tables: dict[int, int] = {}
    luts_len = []
    luts_sym = []

    def table_slot(t: HuffmanTable) -> int:
        key = id(t)
        if key not in tables:
            ln, sy = t.lookup_arrays()
            tables[key] = len(luts_len)
            luts_len.append(ln)
            luts_sym.append(sy)
        return tables[key]

    comp_dc = np.array([table_slot(c.dc_table) for c in components], dtype=np.int64)
    comp_ac = np.array([table_slot(c.ac_table) for c in components], dtype=np.int64)
    comp_h = np.array([c.h for c in components], dtype=np.int64)
    comp_v = np.array([c.v for c in components], dtype=np.int64)
    comp_bw = np.array([c.blocks_w for c in components], dtype=np.int64)
    comp_bh = np.array([c.blocks_h for c in components], dtype=np.int64)
    sizes = comp_bw * comp_bh
    comp_offset = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    out = np.zeros((int(sizes.sum()), 64), dtype=np.int32)
    status, pos = _decode_kernel(
        buf, start, end, n_mcu_x, n_mcu_y, comp_h, comp_v, comp_bw, comp_bh, comp_offset,
        comp_dc, comp_ac, np.stack(luts_len), np.stack(luts_sym), restart_interval, out,
    )
    if status != ERR_OK:
        raise JpegParseError(_ERROR_TEXT[status], int(pos))
    return [
        out[o : o + s].reshape(c.blocks_h, c.blocks_w, 64)
        for o, s, c in zip(comp_offset, sizes, components)
    ]
