#!/usr/bin/env python3
"""Independent straight-line oracle for the golden vector file.

Recomputes every protocol formula from first principles (hashlib SHA-1,
manual length-prefixed concatenation, byte-wise XOR) and prints the golden
vector file to stdout. The committed tests/data/golden_vectors.txt must be
byte-identical to this script's output, and `tempcred export-vectors` must
reproduce it in turn.

Vector line grammar: space-separated tokens; first token is the vector
name, last is the hex output, the tokens in between are hex inputs.
`-` denotes the empty byte string. Timestamp inputs are 8-byte big-endian
hex except for `encode_ts`, whose input is decimal.

Usage: python3 tools/golden_oracle.py > crates/core/tests/data/golden_vectors.txt
"""

import hashlib


def sha1(data: bytes) -> bytes:
    return hashlib.sha1(data).digest()


def concat(*fields: bytes) -> bytes:
    out = b""
    for f in fields:
        assert len(f) < 2**16
        out += len(f).to_bytes(2, "big") + f
    return out


def h(*fields: bytes) -> bytes:
    """Protocol hash: SHA-1 over the canonical concatenation of fields."""
    return sha1(concat(*fields))


def xor(a: bytes, b: bytes) -> bytes:
    assert len(a) == len(b)
    return bytes(x ^ y for x, y in zip(a, b))


def encode_id(ident: bytes) -> bytes:
    assert len(ident) <= 20 and b"\x00" not in ident
    return ident + b"\x00" * (20 - len(ident))


def ts(seconds: int) -> bytes:
    return seconds.to_bytes(8, "big")


LITERAL_000 = b"000"

# Fixed fixture: one user, one sensor, one full registration + login run.
ID_PRE = b"alice-pre"
PW_PRE = b"pw0"
ID = b"alice"
PW = b"secret"
R_I = b"\x11" * 20
TS1 = 1000
TE = 500_000
K_GWN_U = b"\x77" * 20
K_GWN_S = b"\x88" * 20
SID = b"s1"
R_J = b"\x22" * 20
TS2 = 2000
TS3 = 2001
K_I = b"\x33" * 20
K_J = b"\x44" * 20
TS4 = 4000
TS5 = 4001
TS6 = 4002

lines = []


def vec(name: str, ins, out: bytes):
    toks = [name]
    for i in ins:
        if isinstance(i, int):
            toks.append(str(i))
        elif len(i) == 0:
            toks.append("-")
        else:
            toks.append(i.hex())
    toks.append(out.hex() if out else "-")
    lines.append(" ".join(toks))


# --- bitcodec primitives ---
vec("hash", [b""], sha1(b""))
vec("hash", [b"abc"], sha1(b"abc"))
vec("concat", [], concat())
vec("concat", [b"AB"], concat(b"AB"))
vec("concat", [b"AB", b"C"], concat(b"AB", b"C"))
vec("xor", [b"\xaa\x55", b"\x55\xaa"], xor(b"\xaa\x55", b"\x55\xaa"))
vec("xor", [R_I, R_I], xor(R_I, R_I))
vec("encode_id", [b"A"], encode_id(b"A"))
vec("encode_id", [ID], encode_id(ID))
vec("encode_ts", [0], ts(0))
vec("encode_ts", [1000], ts(1000))

# --- registration, user side ---
pre_hash = h(ID_PRE, PW_PRE)
q = h(ID, PW, R_I)
vi = h(ts(TS1), pre_hash)
ci = xor(pre_hash, q)
di = xor(encode_id(ID), pre_hash)
vec("u1_vi", [ID_PRE, PW_PRE, ts(TS1)], vi)
vec("u1_ci", [ID_PRE, PW_PRE, ID, PW, R_I], ci)
vec("u1_di", [ID_PRE, PW_PRE, ID], di)

p = h(ID, ts(TE))
tc = h(K_GWN_U, p, ts(TE))
ptc = xor(tc, q)
hq = h(q)
vec("u2_q", [ci, ID_PRE, PW_PRE], xor(ci, pre_hash))
vec("u2_id", [di, ID_PRE, PW_PRE], ID)
vec("u2_p", [ID, ts(TE)], p)
vec("u2_tc", [K_GWN_U, p, ts(TE)], tc)
vec("u2_ptc", [tc, q], ptc)
vec("u2_hq", [q], hq)

# --- registration, sensor side ---
sensor_hash = h(SID, R_J)
vi_j = h(ts(TS2), sensor_hash)
tc_j = h(K_GWN_S, SID)
q_j = h(ts(TS3), sensor_hash)
reg_mask = h(sensor_hash, ts(TS3))
reg_j = xor(reg_mask, tc_j)
vec("s1_vi", [SID, R_J, ts(TS2)], vi_j)
vec("s2_tc", [K_GWN_S, SID], tc_j)
vec("s2_q", [SID, R_J, ts(TS3)], q_j)
vec("s2_reg", [SID, R_J, ts(TS3), tc_j], reg_j)
vec("s3_tc", [reg_j, SID, R_J, ts(TS3)], xor(reg_j, reg_mask))

# --- login and authentication ---
did = xor(encode_id(ID), h(tc, ts(TS4)))
c = xor(h(q, ts(TS4)), tc)
pks = xor(K_I, h(tc, ts(TS4), LITERAL_000))
vec("a1_tc", [ptc, q], xor(ptc, q))
vec("a1_did", [ID, tc, ts(TS4)], did)
vec("a1_c", [q, ts(TS4), tc], c)
vec("a1_pks", [K_I, tc, ts(TS4)], pks)

vec("a2_id", [did, tc, ts(TS4)], ID)
vec("a2_k", [pks, tc, ts(TS4)], xor(pks, h(tc, ts(TS4), LITERAL_000)))
did_gwn = xor(encode_id(ID), h(did, tc_j, ts(TS5)))
c_gwn = h(ID, tc_j, ts(TS5))
pks_gwn = xor(K_I, h(tc_j, ts(TS5)))
vec("a2_did_gwn", [ID, did, tc_j, ts(TS5)], did_gwn)
vec("a2_c_gwn", [ID, tc_j, ts(TS5)], c_gwn)
vec("a2_pks_gwn", [K_I, tc_j, ts(TS5)], pks_gwn)

vec("a3_id", [did_gwn, did, tc_j, ts(TS5)], ID)
vec("a3_k", [pks_gwn, tc_j, ts(TS5)], xor(pks_gwn, h(tc_j, ts(TS5))))
c_j = h(K_J, ID, SID, ts(TS6))
pks_j = xor(K_J, h(K_I, ts(TS6)))
vec("a3_c", [K_J, ID, SID, ts(TS6)], c_j)
vec("a3_pks", [K_J, K_I, ts(TS6)], pks_j)

vec("a4_k", [pks_j, K_I, ts(TS6)], xor(pks_j, h(K_I, ts(TS6))))
vec("a4_key", [K_I, K_J], h(xor(K_I, K_J)))

print("\n".join(lines))
