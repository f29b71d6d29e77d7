"""Bit-level label codec and the scheme bundle container.

Labels are finite binary strings (Python str over '0'/'1'), structured as a
list of blocks under the 2x separator code: bit 1 -> "10", bit 0 -> "01",
block separator -> "00". Fixed-width integer subfields inside a block are
big-endian with leading zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, TextIO

from .errors import MalformedCodeword

LabelBits = str


def encode_blocks(blocks: Sequence[str]) -> LabelBits:
    """Separator-encode a block list.

    Length is exactly 2*(total payload bits) + 2*(len(blocks)-1).
    """
    pieces = []
    for block in blocks:
        pieces.append("".join("10" if b == "1" else "01" for b in block))
    return "00".join(pieces)


def decode_blocks(bits: LabelBits) -> list[str]:
    """Exact inverse of encode_blocks; rejects odd length and the "11" pair."""
    if len(bits) % 2 != 0:
        raise MalformedCodeword(f"odd bit length {len(bits)}")
    blocks = [[]]
    for i in range(0, len(bits), 2):
        pair = bits[i : i + 2]
        if pair == "10":
            blocks[-1].append("1")
        elif pair == "01":
            blocks[-1].append("0")
        elif pair == "00":
            blocks.append([])
        else:
            raise MalformedCodeword(f"invalid codeword '11' at offset {i}")
    return ["".join(b) for b in blocks]


def int_to_bits(x: int, width: int | None = None) -> str:
    """Binary representation, MSB first; zero-padded to `width` if given."""
    if x < 0:
        raise ValueError("negative value")
    s = format(x, "b")
    if width is not None:
        if len(s) > width:
            raise ValueError(f"{x} does not fit in {width} bits")
        s = s.zfill(width)
    return s


def bits_to_int(bits: str) -> int:
    return int(bits, 2) if bits else 0


def bit_length_of(n: int) -> int:
    """lg n = ceil(log2(n+1)): the length of the binary representation."""
    return n.bit_length()


@dataclass
class SchemeBundle:
    """Oracle output: per-node labels plus offline metadata.

    `meta` (broadcast trees, schedules, stripe maps, ...) exists only for
    tests and audits; node programs never see it.
    """

    scheme: str
    labels: list[LabelBits]
    meta: dict = field(default_factory=dict)

    def max_label_bits(self) -> int:
        return max((len(l) for l in self.labels), default=0)


def pack_bits_hex(bits: str) -> str:
    """Left-pack a bit string into hex, zero-padded to a whole byte."""
    if not bits:
        return ""
    padded = bits + "0" * (-len(bits) % 8)
    return bytes(
        int(padded[i : i + 8], 2) for i in range(0, len(padded), 8)
    ).hex()


def unpack_bits_hex(hexstr: str, bitlen: int) -> str:
    raw = bytes.fromhex(hexstr)
    bits = "".join(format(b, "08b") for b in raw)
    return bits[:bitlen]


def dump_labels(bundle: SchemeBundle, fp: TextIO) -> None:
    """One line per node: node<TAB>bitlen<TAB>hex (bits left-packed)."""
    for v, bits in enumerate(bundle.labels):
        fp.write(f"{v}\t{len(bits)}\t{pack_bits_hex(bits)}\n")


def load_labels(fp: TextIO) -> list[LabelBits]:
    labels = []
    for line in fp:
        line = line.rstrip("\n")
        if not line:
            continue
        node, bitlen, hexstr = (line.split("\t") + [""])[:3]
        assert int(node) == len(labels), "label dump must be dense and ordered"
        labels.append(unpack_bits_hex(hexstr, int(bitlen)))
    return labels
