"""Builds a keystore file without libsodium and freezes it as a fixture.

Argon2id comes from `cryptography`; XChaCha20-Poly1305 is HChaCha20 (below)
followed by the IETF ChaCha20-Poly1305 AEAD.
"""

import hashlib
import json
import pathlib
import struct

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.argon2 import Argon2id
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "keystore_vectors.json"


def rotl(v, n):
    return ((v << n) & 0xFFFFFFFF) | (v >> (32 - n))


def quarter(s, a, b, c, d):
    s[a] = (s[a] + s[b]) & 0xFFFFFFFF; s[d] = rotl(s[d] ^ s[a], 16)
    s[c] = (s[c] + s[d]) & 0xFFFFFFFF; s[b] = rotl(s[b] ^ s[c], 12)
    s[a] = (s[a] + s[b]) & 0xFFFFFFFF; s[d] = rotl(s[d] ^ s[a], 8)
    s[c] = (s[c] + s[d]) & 0xFFFFFFFF; s[b] = rotl(s[b] ^ s[c], 7)


def hchacha20(key, nonce16):
    s = list(struct.unpack("<4I", b"expand 32-byte k")) + list(struct.unpack("<8I", key)) + list(
        struct.unpack("<4I", nonce16))
    for _ in range(10):
        quarter(s, 0, 4, 8, 12); quarter(s, 1, 5, 9, 13); quarter(s, 2, 6, 10, 14); quarter(s, 3, 7, 11, 15)
        quarter(s, 0, 5, 10, 15); quarter(s, 1, 6, 11, 12); quarter(s, 2, 7, 8, 13); quarter(s, 3, 4, 9, 14)
    return struct.pack("<8I", *(s[0:4] + s[12:16]))


def xchacha_encrypt(key, nonce24, plaintext, ad):
    sub = hchacha20(key, nonce24[:16])
    return ChaCha20Poly1305(sub).encrypt(b"\0" * 4 + nonce24[16:], plaintext, ad)


# RFC draft-irtf-cfrg-xchacha, section 2.2.1 test vector.
assert hchacha20(bytes(range(32)), bytes.fromhex("000000090000004a0000000031415927")).hex() == (
    "82413b4227b27bfed30e42508a877d73a0f9e4d58a74a853c12ec41326d3ecdc")


def keystore(label, passphrase, opslimit, memlimit, salt, nonce):
    seed = hashlib.sha256(label.encode()).digest()
    pub = Ed25519PrivateKey.from_private_bytes(seed).public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    address = hashlib.sha256(pub).digest()[-20:]
    key = Argon2id(salt=salt, length=32, iterations=opslimit, lanes=1, memory_cost=memlimit // 1024).derive(
        passphrase.encode())
    ct = xchacha_encrypt(key, nonce, seed, address + pub)
    return {
        "version": 1,
        "address": "0x" + address.hex(),
        "public_key": "0x" + pub.hex(),
        "kdf": {"name": "argon2id", "opslimit": opslimit, "memlimit": memlimit, "salt": "0x" + salt.hex()},
        "cipher": {"name": "xchacha20poly1305-ietf", "nonce": "0x" + nonce.hex(), "ciphertext": "0x" + ct.hex()},
    }


def main():
    cases = []
    for label, pw, ops, mem in [("keystore/a", "correct horse", 1, 8192), ("keystore/b", "", 2, 65536),
                                ("keystore/c", "pässwörd", 3, 1 << 20)]:
        salt = hashlib.sha256(("salt/" + label).encode()).digest()[:16]
        nonce = hashlib.sha256(("nonce/" + label).encode()).digest()[:24]
        cases.append({"label": label, "passphrase": pw, "file": keystore(label, pw, ops, mem, salt, nonce)})
    OUT.write_text(json.dumps({"keystores": cases}, indent=1, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
