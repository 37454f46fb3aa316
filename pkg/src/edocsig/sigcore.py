"""Hash-then-sign primitives behind a registry keyed by XML Signature URIs.

Algorithms are named by the URIs that appear verbatim in serialized
signatures. SHA-1 and RSA-SHA1 are registered because the envelope format
names them; SHA-256 variants are registered alongside as drop-ins.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import random
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import padding, rsa

from .errors import KeyMismatch, MalformedBase64, MalformedKey, UnknownAlgorithm

SHA1 = "http://www.w3.org/2000/09/xmldsig#sha1"
SHA256 = "http://www.w3.org/2001/04/xmlenc#sha256"
RSA_SHA1 = "http://www.w3.org/2000/09/xmldsig#rsa-sha1"
RSA_SHA256 = "http://www.w3.org/2001/04/xmldsig-more#rsa-sha256"


@dataclass(frozen=True)
class DigestAlgorithm:
    uri: str
    hashlib_name: str
    size: int

    def new(self):
        return hashlib.new(self.hashlib_name)

    def crypto_hash(self) -> hashes.HashAlgorithm:
        return {"sha1": hashes.SHA1, "sha256": hashes.SHA256}[self.hashlib_name]()


@dataclass(frozen=True)
class SignatureAlgorithm:
    uri: str
    digest: DigestAlgorithm
    key_type: str = "rsa"


DIGESTS: dict[str, DigestAlgorithm] = {
    d.uri: d for d in (DigestAlgorithm(SHA1, "sha1", 20), DigestAlgorithm(SHA256, "sha256", 32))
}
SIGNATURES: dict[str, SignatureAlgorithm] = {
    RSA_SHA1: SignatureAlgorithm(RSA_SHA1, DIGESTS[SHA1]),
    RSA_SHA256: SignatureAlgorithm(RSA_SHA256, DIGESTS[SHA256]),
}


def digest_algorithm(uri: str) -> DigestAlgorithm:
    try:
        return DIGESTS[uri]
    except KeyError:
        raise UnknownAlgorithm(f"unknown digest algorithm {uri!r}") from None


def signature_algorithm(uri: str) -> SignatureAlgorithm:
    try:
        return SIGNATURES[uri]
    except KeyError:
        raise UnknownAlgorithm(f"unknown signature algorithm {uri!r}") from None


@dataclass(frozen=True)
class Digest:
    algorithm: str
    value: bytes

    def __post_init__(self):
        expected = digest_algorithm(self.algorithm).size
        if len(self.value) != expected:
            raise ValueError(f"digest must be {expected} bytes, got {len(self.value)}")

    def hex(self) -> str:
        return self.value.hex()


@dataclass(frozen=True)
class SignatureBytes:
    algorithm: str
    value: bytes

    def __post_init__(self):
        if not self.value:
            raise ValueError("empty signature value")


@dataclass(frozen=True)
class KeyPair:
    """PEM-encoded private (PKCS#8) and public (SubjectPublicKeyInfo) keys."""

    private_key: bytes
    public_key: bytes
    algorithm: str


def digest(data: bytes, algorithm: str = SHA1) -> Digest:
    h = digest_algorithm(algorithm).new()
    h.update(data)
    return Digest(algorithm, h.digest())


# -- keys -------------------------------------------------------------------

_SMALL_PRIMES = [p for p in range(3, 2000) if all(p % q for q in range(2, int(p**0.5) + 1))]


def _is_probable_prime(n: int, rng: random.Random, rounds: int = 40) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        x = pow(rng.randrange(2, n - 1), d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if x == n - 1:
                break
        else:
            return False
    return True


def _random_prime(bits: int, rng: random.Random, e: int) -> int:
    while True:
        # top two bits set so p*q has exactly 2*bits bits
        candidate = rng.getrandbits(bits) | (3 << (bits - 2)) | 1
        if (candidate - 1) % e and _is_probable_prime(candidate, rng):
            return candidate


def _rsa_from_rng(bits: int, rng: random.Random) -> rsa.RSAPrivateKey:
    e = 65537
    while True:
        p = _random_prime(bits // 2, rng, e)
        q = _random_prime(bits - bits // 2, rng, e)
        if p == q:
            continue
        if p < q:
            p, q = q, p
        phi = (p - 1) * (q - 1)
        d = pow(e, -1, phi)
        public = rsa.RSAPublicNumbers(e, p * q)
        numbers = rsa.RSAPrivateNumbers(
            p, q, d, rsa.rsa_crt_dmp1(d, p), rsa.rsa_crt_dmq1(d, q), rsa.rsa_crt_iqmp(p, q), public
        )
        return numbers.private_key()


def generate_keypair(
    algorithm: str = RSA_SHA1, size_hint: int = 2048, rng: random.Random | None = None
) -> KeyPair:
    """Fresh key pair; deterministic when a seeded ``rng`` is injected."""
    signature_algorithm(algorithm)
    if size_hint < 1024:
        raise ValueError("RSA keys below 1024 bits are not supported")
    if rng is None:
        key = rsa.generate_private_key(public_exponent=65537, key_size=size_hint)
    else:
        key = _rsa_from_rng(size_hint, rng)
    return KeyPair(private_pem(key), public_pem(key.public_key()), algorithm)


def private_pem(key) -> bytes:
    return key.private_bytes(
        serialization.Encoding.PEM, serialization.PrivateFormat.PKCS8, serialization.NoEncryption()
    )


def public_pem(key) -> bytes:
    return key.public_bytes(serialization.Encoding.PEM, serialization.PublicFormat.SubjectPublicKeyInfo)


def load_private_key(data: bytes):
    try:
        return serialization.load_pem_private_key(data, password=None)
    except (ValueError, TypeError) as exc:
        raise MalformedKey(f"cannot load private key: {exc}") from None


def load_public_key(data: bytes):
    try:
        return serialization.load_pem_public_key(data)
    except (ValueError, TypeError) as exc:
        raise MalformedKey(f"cannot load public key: {exc}") from None


def public_key_of(private_key: bytes) -> bytes:
    return public_pem(load_private_key(private_key).public_key())


def keypair_from_pem(private_key: bytes, algorithm: str = RSA_SHA1) -> KeyPair:
    return KeyPair(private_key, public_key_of(private_key), algorithm)


# -- sign / verify ----------------------------------------------------------


def sign(private_key: bytes, data: bytes, algorithm: str = RSA_SHA1) -> SignatureBytes:
    alg = signature_algorithm(algorithm)
    key = load_private_key(private_key)
    if not isinstance(key, rsa.RSAPrivateKey):
        raise KeyMismatch(f"{algorithm} needs an RSA key, got {type(key).__name__}")
    value = key.sign(data, padding.PKCS1v15(), alg.digest.crypto_hash())
    return SignatureBytes(algorithm, value)


def verify(public_key: bytes, data: bytes, sig: SignatureBytes) -> bool:
    """True iff ``sig`` is a valid signature of ``data``; mismatch is False, never an error."""
    alg = signature_algorithm(sig.algorithm)
    key = load_public_key(public_key)
    if not isinstance(key, rsa.RSAPublicKey):
        return False
    try:
        key.verify(sig.value, data, padding.PKCS1v15(), alg.digest.crypto_hash())
    except InvalidSignature:
        return False
    return True


# -- base64 -----------------------------------------------------------------


def base64_encode(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def base64_decode(text: str) -> bytes:
    try:
        return base64.b64decode(text.encode("ascii"), validate=True)
    except (binascii.Error, UnicodeEncodeError) as exc:
        raise MalformedBase64(f"invalid base64: {exc}") from None
