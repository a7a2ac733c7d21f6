"""One-way two-party protocol for private distance correlation.

Alice holds X, Bob holds Y, rows are paired by index. Alice releases,
under differential privacy, (a) K noisy one-dimensional projections of
her data and (b) a noisy distance variance of X, plus the noise
parameters themselves (safe under post-processing). Bob samples his own
projection directions, assembles the private distance covariance from
the received values and his local Y, computes his own distance variance
non-privately, and forms the final correlation. After connection setup
no byte ever flows from Bob to Alice.

Two row regimes exist: the repeated variant projects all n rows K times
(sequential budget composition), the disjoint variant projects each of K
contiguous row blocks once (parallel composition, every block must keep
at least 4 rows).

Wire format: one UTF-8 JSON object per line, field `tag` naming the
message type, field `v` = 1 the protocol version, floats carried at full
precision. Message order from Alice: handshake, projections (k = 1..K),
variance, noise-params, end.
"""

from __future__ import annotations

import json
import numbers
import socket
import threading
from dataclasses import dataclass, field

import numpy as np

from . import serial
from .datasets import minmax_columns
from .errors import ConfigError, DataError, DecodeError, PartitionError, ProtocolError, TransportError
from .estimators import (
    _absdiff,
    _udcov_from_distances,
    as_data_matrix,
    projection_constant,
    sample_unit_projections,
    unbiased_dcov,
)
from .privacy import (
    PROTOCOL_VARIANTS,
    NoiseSpec,
    PrivacyBudget,
    compose_budget,
    gaussian_sigma,
    hsic_global_sensitivity,
    l2_sensitivity,
    privatize_dvar,
    privatize_projection,
)

PROTOCOL_VERSION = 1
MESSAGE_TAGS = ("handshake", "projection", "variance", "noise-params", "end")
NORMALIZATIONS = ("none", "min-max")
TRANSPORTS = ("in-process", "stream")

# seed-derivation salts, fixed forever for reproducibility
_SALT_DIRECTIONS = 0xD17
_SALT_NOISE = 0x9015E
_SALT_DVAR = 0xD7A2
_SALT_SHUFFLE = 0x5F0F
_SALT_BOB = 0xB0B


@dataclass(frozen=True)
class ProtocolConfig:
    """Session parameters shared by both roles.

    eps_per_projection and delta calibrate the Gaussian noise on each
    released projection; eps_variance the Laplace noise on the distance
    variance release. seed drives all of Alice's randomness (Bob's
    default stream is derived from it, see derive_bob_seed).
    shuffle_blocks randomizes the disjoint block assignment with a seeded
    permutation announced in the handshake. zero_noise is a testing hook
    that forces both noise scales to zero while keeping every other code
    path identical.
    """

    k: int
    variant: str
    eps_per_projection: float
    delta: float
    eps_variance: float
    seed: int | None = None
    normalization: str = "none"
    shuffle_blocks: bool = False
    zero_noise: bool = False

    def __post_init__(self):
        if not (isinstance(self.k, numbers.Integral) and self.k >= 1):
            raise ConfigError(f"k must be a positive integer, got {self.k!r}")
        if self.variant not in PROTOCOL_VARIANTS:
            raise ConfigError(f"variant must be one of {PROTOCOL_VARIANTS}, got {self.variant!r}")
        for name in ("eps_per_projection", "eps_variance"):
            v = getattr(self, name)
            if not (isinstance(v, numbers.Real) and v > 0 and np.isfinite(v)):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        if not (isinstance(self.delta, numbers.Real) and 0.0 <= self.delta < 0.5):
            raise ConfigError(f"delta must lie in [0, 1/2), got {self.delta!r}")
        if self.seed is not None and not isinstance(self.seed, numbers.Integral):
            raise ConfigError(f"seed must be an integer or None, got {self.seed!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        if self.shuffle_blocks and self.variant != "disjoint":
            raise ConfigError("shuffle_blocks only applies to the disjoint variant")


@dataclass(frozen=True)
class ProtocolMessage:
    """One wire message: a tag plus its payload fields."""

    tag: str
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.tag not in MESSAGE_TAGS:
            raise ProtocolError(f"unknown message tag {self.tag!r}")


@dataclass(frozen=True)
class DcorrResult:
    """Bob's assembled private distance correlation and its provenance.

    dcorr_raw may leave [0, 1] under noise; dcorr_clamped is its clip.
    When dvar_x_dp * dvar_y <= 0 the guard zeroes both. trace holds the
    per-projection distance covariance contributions ordered by k.
    """

    dcorr_raw: float
    dcorr_clamped: float
    dcov_dp: float
    dvar_x_dp: float
    dvar_y: float
    total_budget: tuple[float, float]
    variant: str
    k: int
    trace: tuple[float, ...]

    def as_dict(self) -> dict:
        return {
            "dcorr_raw": float(self.dcorr_raw),
            "dcorr_clamped": float(self.dcorr_clamped),
            "dcov_dp": float(self.dcov_dp),
            "dvar_x_dp": float(self.dvar_x_dp),
            "dvar_y": float(self.dvar_y),
            "total_budget": [float(self.total_budget[0]), float(self.total_budget[1])],
            "variant": self.variant,
            "k": int(self.k),
            "trace": [float(t) for t in self.trace],
        }


def partition_rows(n: int, k: int) -> list[tuple[int, int]]:
    """Split rows 1..n into k contiguous 1-based inclusive blocks.

    The first n mod k blocks get ceil(n/k) rows, the rest floor(n/k).
    Every block must keep at least 4 rows or the per-block estimator is
    undefined, hence the floor(n/k) >= 4 precondition.
    """
    if not (isinstance(n, numbers.Integral) and n >= 1):
        raise ConfigError(f"n must be a positive integer, got {n!r}")
    if not (isinstance(k, numbers.Integral) and k >= 1):
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    if n // k < 4:
        raise PartitionError(f"cannot split {n} rows into {k} blocks of >= 4 rows")
    base, extra = divmod(int(n), int(k))
    blocks: list[tuple[int, int]] = []
    start = 1
    for i in range(int(k)):
        size = base + (1 if i < extra else 0)
        blocks.append((start, start + size - 1))
        start += size
    return blocks


def _alice_rng(seed: int | None, salt: int) -> np.random.Generator:
    if seed is None:
        return np.random.default_rng()
    return np.random.default_rng(np.random.SeedSequence([int(seed), salt]))


def derive_bob_seed(seed: int | None):
    """Bob's default RNG seed for a session with Alice's seed `seed`.

    Deterministic but independent of every Alice-side stream; None stays
    None (a nondeterministic session).
    """
    if seed is None:
        return None
    return np.random.SeedSequence([int(seed), _SALT_BOB])


def build_noise_spec(w2: float, n: int, cfg: ProtocolConfig) -> NoiseSpec:
    """Calibrate both noise scales for a session (zero under the testing hook)."""
    if cfg.zero_noise:
        sigma = 0.0
        lap = 0.0
    else:
        sigma = gaussian_sigma(w2, PrivacyBudget(cfg.eps_per_projection, cfg.delta))
        lap = hsic_global_sensitivity(n) / float(cfg.eps_variance)
    return NoiseSpec(
        gaussian_sigma=sigma,
        laplace_scale=lap,
        w2=float(w2),
        budget=PrivacyBudget(cfg.eps_per_projection, cfg.delta),
    )


def alice_prepare(x, cfg: ProtocolConfig) -> list[ProtocolMessage]:
    """Alice's side: produce the full ordered message list for one session.

    Samples the K unit directions, calibrates sigma against the realized
    stacked-direction sensitivity, projects each block (disjoint) or all
    rows (repeated), adds Gaussian noise, then appends the noisy distance
    variance, the noise parameters, and the end marker. All randomness
    derives from cfg.seed.
    """
    X = as_data_matrix(x, "x")
    n, d = X.shape
    if n < 4:
        raise DataError(f"need at least 4 rows, got {n}")
    if cfg.variant == "disjoint":
        blocks = partition_rows(n, cfg.k)
    else:
        blocks = [(1, n)] * cfg.k

    handshake_payload: dict = {
        "n": int(n),
        "K": int(cfg.k),
        "variant": cfg.variant,
        "d": int(d),
        "normalization": cfg.normalization,
    }
    if cfg.normalization == "min-max":
        X = minmax_columns(X)
    if cfg.shuffle_blocks:
        shuffle_seed = int(_alice_rng(cfg.seed, _SALT_SHUFFLE).integers(2**63))
        handshake_payload["shuffle_seed"] = shuffle_seed
        X = X[np.random.default_rng(shuffle_seed).permutation(n)]

    directions = sample_unit_projections(d, cfg.k, _alice_rng(cfg.seed, _SALT_DIRECTIONS))
    w2 = l2_sensitivity(directions)
    spec = build_noise_spec(w2, n, cfg)

    messages = [ProtocolMessage("handshake", handshake_payload)]
    noise_rng = _alice_rng(cfg.seed, _SALT_NOISE)
    for i, (start, end) in enumerate(blocks):
        z = X[start - 1 : end] @ directions.directions[i]
        z_noisy = privatize_projection(z, spec.gaussian_sigma, noise_rng)
        messages.append(
            ProtocolMessage(
                "projection",
                {"k": i + 1, "rows": [start, end], "values": [float(v) for v in z_noisy]},
            )
        )
    dvar_rec = privatize_dvar(
        X,
        cfg.eps_variance,
        seed=_alice_rng(cfg.seed, _SALT_DVAR),
        scale=0.0 if cfg.zero_noise else None,
    )
    messages.append(ProtocolMessage("variance", {"value": float(dvar_rec.value), "eps": float(cfg.eps_variance)}))
    messages.append(
        ProtocolMessage(
            "noise-params",
            {
                "sigma": float(spec.gaussian_sigma),
                "w2": float(spec.w2),
                "eps": float(cfg.eps_per_projection),
                "delta": float(cfg.delta),
            },
        )
    )
    messages.append(ProtocolMessage("end", {}))
    return messages


_REQUIRED_FIELDS = {
    "handshake": ("n", "K", "variant", "d", "normalization"),
    "projection": ("k", "rows", "values"),
    "variance": ("value", "eps"),
    "noise-params": ("sigma", "w2", "eps", "delta"),
    "end": (),
}


def _check_handshake(p: dict) -> None:
    if not (isinstance(p["n"], int) and p["n"] >= 1):
        raise ProtocolError(f"handshake n must be a positive integer, got {p['n']!r}")
    if not (isinstance(p["K"], int) and p["K"] >= 1):
        raise ProtocolError(f"handshake K must be a positive integer, got {p['K']!r}")
    if not (isinstance(p["d"], int) and p["d"] >= 1):
        raise ProtocolError(f"handshake d must be a positive integer, got {p['d']!r}")
    if p["variant"] not in PROTOCOL_VARIANTS:
        raise ProtocolError(f"handshake variant {p['variant']!r} unknown")
    if p["normalization"] not in NORMALIZATIONS:
        raise ProtocolError(f"handshake normalization {p['normalization']!r} unknown")


def _validate_sequence(messages: list[ProtocolMessage]) -> tuple[dict, list[ProtocolMessage], dict, dict]:
    """Enforce the session shape; returns (handshake, projections, variance, noise_params)."""
    if not messages:
        raise ProtocolError("empty session")
    if messages[0].tag != "handshake":
        raise ProtocolError(f"session must start with handshake, got {messages[0].tag!r}")
    if messages[-1].tag != "end":
        raise ProtocolError("session must finish with an end message")
    counts = {tag: 0 for tag in MESSAGE_TAGS}
    for m in messages:
        counts[m.tag] += 1
    for tag in ("handshake", "variance", "noise-params", "end"):
        if counts[tag] != 1:
            raise ProtocolError(f"expected exactly one {tag} message, got {counts[tag]}")
    for m in messages:
        missing = [f for f in _REQUIRED_FIELDS[m.tag] if f not in m.payload]
        if missing:
            raise ProtocolError(f"{m.tag} message missing fields {missing}")
    hs = messages[0].payload
    _check_handshake(hs)
    projections = [m for m in messages if m.tag == "projection"]
    if len(projections) != hs["K"]:
        raise ProtocolError(f"expected {hs['K']} projection messages, got {len(projections)}")
    ks = sorted(int(m.payload["k"]) for m in projections)
    if ks != list(range(1, hs["K"] + 1)):
        raise ProtocolError(f"projection indices must be a permutation of 1..{hs['K']}, got {ks}")
    variance = next(m.payload for m in messages if m.tag == "variance")
    noise_params = next(m.payload for m in messages if m.tag == "noise-params")
    return hs, projections, variance, noise_params


def bob_compute(y, messages: list[ProtocolMessage], seed=None) -> DcorrResult:
    """Bob's side: assemble the private distance correlation.

    Validates the message sequence against the handshake, samples his own
    unit directions (one per projection index), forms the per-block
    distance covariances between received noisy values and his projected
    rows, averages them, and combines with the received private distance
    variance of X and his own non-private distance variance of Y. seed
    drives only Bob's direction sampling.
    """
    Y = as_data_matrix(y, "y")
    hs, projections, variance, noise_params = _validate_sequence(messages)
    n, k, variant = hs["n"], hs["K"], hs["variant"]
    if Y.shape[0] != n:
        raise ProtocolError(f"handshake announces n={n} but y has {Y.shape[0]} rows")
    if n < 4:
        raise ProtocolError(f"handshake n={n} is below the 4-row minimum")
    if hs["normalization"] == "min-max":
        Y = minmax_columns(Y)
    if "shuffle_seed" in hs:
        Y = Y[np.random.default_rng(int(hs["shuffle_seed"])).permutation(n)]

    if variant == "disjoint":
        expected_blocks = partition_rows(n, k)
    else:
        expected_blocks = [(1, n)] * k

    q = Y.shape[1]
    cp = projection_constant(int(hs["d"]))
    cq = projection_constant(q)
    directions = sample_unit_projections(q, k, seed)

    contributions = np.empty(k, dtype=np.float64)
    for m in sorted(projections, key=lambda m: int(m.payload["k"])):
        idx = int(m.payload["k"])
        rows = m.payload["rows"]
        if not (isinstance(rows, (list, tuple)) and len(rows) == 2):
            raise ProtocolError(f"projection {idx} has malformed rows {rows!r}")
        start, end = int(rows[0]), int(rows[1])
        if (start, end) != expected_blocks[idx - 1]:
            raise ProtocolError(
                f"projection {idx} covers rows {start}..{end}, expected {expected_blocks[idx - 1]}"
            )
        values = np.asarray(m.payload["values"], dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != end - start + 1:
            raise ProtocolError(f"projection {idx} payload length {values.shape} does not match its block")
        if not np.isfinite(values).all():
            raise ProtocolError(f"projection {idx} carries non-finite values")
        w = Y[start - 1 : end] @ directions.directions[idx - 1]
        contributions[idx - 1] = cp * cq * _udcov_from_distances(_absdiff(values), _absdiff(w))

    dcov_dp = float(contributions.mean())
    dvar_x_dp = float(variance["value"])
    dvar_y = unbiased_dcov(Y, Y)
    prod = dvar_x_dp * dvar_y
    if prod <= 0.0:
        raw = 0.0
        clamped = 0.0
    else:
        raw = dcov_dp / float(np.sqrt(prod))
        clamped = min(1.0, max(0.0, raw))
    ledger = compose_budget(
        variant,
        k,
        float(noise_params["eps"]),
        float(variance["eps"]),
        delta_per_projection=float(noise_params["delta"]),
    )
    return DcorrResult(
        dcorr_raw=raw,
        dcorr_clamped=clamped,
        dcov_dp=dcov_dp,
        dvar_x_dp=dvar_x_dp,
        dvar_y=dvar_y,
        total_budget=(ledger.total_epsilon, ledger.total_delta),
        variant=variant,
        k=int(k),
        trace=tuple(float(c) for c in contributions),
    )


def encode_message(m: ProtocolMessage) -> bytes:
    """Serialize one message to a newline-terminated UTF-8 JSON line."""
    body = {"tag": m.tag, "v": PROTOCOL_VERSION}
    body.update(m.payload)
    return (serial.dumps(body) + "\n").encode("utf-8")


def decode_message(line: bytes | str) -> ProtocolMessage:
    """Parse one wire line back into a ProtocolMessage.

    Unknown tags, wrong protocol versions, missing fields, and malformed
    JSON all raise DecodeError.
    """
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DecodeError(f"line is not valid UTF-8: {e}")
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise DecodeError(f"line is not valid JSON: {e}")
    if not isinstance(obj, dict):
        raise DecodeError("wire line must be a JSON object")
    tag = obj.pop("tag", None)
    if tag not in MESSAGE_TAGS:
        raise DecodeError(f"unknown message tag {tag!r}")
    version = obj.pop("v", None)
    if version != PROTOCOL_VERSION:
        raise DecodeError(f"unsupported protocol version {version!r}")
    missing = [f for f in _REQUIRED_FIELDS[tag] if f not in obj]
    if missing:
        raise DecodeError(f"{tag} message missing fields {missing}")
    return ProtocolMessage(tag, obj)


def write_session(messages: list[ProtocolMessage], fp) -> None:
    """Write all messages as wire lines to a binary file-like object."""
    for m in messages:
        fp.write(encode_message(m))
    fp.flush()


def read_session(fp) -> list[ProtocolMessage]:
    """Read wire lines from a binary file-like object until the end marker.

    Premature EOF raises TransportError carrying the last completed
    message tag as the phase.
    """
    messages: list[ProtocolMessage] = []
    phase: str | None = None
    while True:
        try:
            line = fp.readline()
        except OSError as e:
            raise TransportError(f"stream failed after {phase or 'start'}: {e}", phase=phase)
        if not line:
            raise TransportError(f"stream ended after {phase or 'start'} without an end message", phase=phase)
        if isinstance(line, bytes) and not line.strip():
            continue
        m = decode_message(line)
        messages.append(m)
        phase = m.tag
        if m.tag == "end":
            return messages


def run_session(x, y, cfg: ProtocolConfig, transport: str = "in-process") -> DcorrResult:
    """Run one full session locally and return Bob's result.

    transport "in-process" hands the message list straight to Bob;
    "stream" serializes them through a real byte pipe (Alice writing on
    one end, Bob reading on the other, nothing flowing back). Both give
    identical results for identical inputs; Bob's seed derives from
    cfg.seed.
    """
    if transport not in TRANSPORTS:
        raise ConfigError(f"transport must be one of {TRANSPORTS}, got {transport!r}")
    bob_seed = derive_bob_seed(cfg.seed)
    if transport == "in-process":
        return bob_compute(y, alice_prepare(x, cfg), bob_seed)

    messages = alice_prepare(x, cfg)  # fail fast before opening the pipe
    sock_a, sock_b = socket.socketpair()
    alice_error: list[BaseException] = []

    def _alice_writer():
        try:
            with sock_a.makefile("wb") as fa:
                write_session(messages, fa)
        except BaseException as e:  # surfaced after join
            alice_error.append(e)
        finally:
            try:
                sock_a.shutdown(socket.SHUT_WR)
            except OSError:
                pass

    writer = threading.Thread(target=_alice_writer, name="alice-writer")
    writer.start()
    try:
        with sock_b.makefile("rb") as fb:
            received = read_session(fb)
    finally:
        writer.join()
        sock_a.close()
        sock_b.close()
    if alice_error:
        raise TransportError(f"sender failed: {alice_error[0]}") from alice_error[0]
    return bob_compute(y, received, bob_seed)


def serve_bob(host: str, port: int, y, seed=None, timeout: float = 60.0) -> DcorrResult:
    """Listen for exactly one session on (host, port) and compute the result.

    Bob never writes application bytes back; the socket's write side is
    shut down immediately after accepting.
    """
    try:
        with socket.create_server((host, int(port))) as server:
            server.settimeout(timeout)
            conn, _ = server.accept()
    except OSError as e:
        raise TransportError(f"cannot listen on {host}:{port}: {e}")
    with conn:
        try:
            conn.shutdown(socket.SHUT_WR)
        except OSError:
            pass
        conn.settimeout(timeout)
        with conn.makefile("rb") as fp:
            messages = read_session(fp)
    return bob_compute(y, messages, seed)


def connect_and_send(host: str, port: int, x, cfg: ProtocolConfig) -> int:
    """Alice's network role: run alice_prepare and stream the messages out.

    Returns the number of messages sent. Connection failures raise
    TransportError.
    """
    messages = alice_prepare(x, cfg)
    try:
        with socket.create_connection((host, int(port)), timeout=60.0) as conn:
            with conn.makefile("wb") as fp:
                write_session(messages, fp)
    except OSError as e:
        raise TransportError(f"cannot send to {host}:{port}: {e}")
    return len(messages)
