"""File formats: CTF and LSF binary containers, scenario files, CSV output
and run manifests.

Binary containers start with a text header of ``key=value`` lines, the
first line being the magic (``CTF1`` or ``LSF1``) and the last ``END``.
The payload follows immediately as little-endian IEEE-754 doubles in
row-major order. CTF samples are stored as (real, imag) pairs.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from chanstat.data import AnalysisConfig, ChannelTransferFunction
from chanstat.errors import FormatError
from chanstat.lsf import LsfSequence
from chanstat.synth import LOS, SINGLE_BOUNCE, PropagationPath, Scenario

CTF_MAGIC = "CTF1"
LSF_MAGIC = "LSF1"
HEADER_END = b"END\n"
MAX_HEADER = 1 << 16

_ENCODINGS = {"complex128": "<c16", "complex64": "<c8", "float64": "<f8"}


def fmt(x) -> str:
    """Round-trip safe real formatting, 17 significant digits."""
    return format(float(x), ".17g")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write(path, data) -> None:
    """Write `data` (bytes or str) to `path` via a temporary file and rename."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# binary containers
# ---------------------------------------------------------------------------

def _encode_header(magic: str, fields: Dict[str, str]) -> bytes:
    lines = [magic] + [f"{k}={v}" for k, v in fields.items()] + ["END"]
    return ("\n".join(lines) + "\n").encode("ascii")


def _split_header(data: bytes, magic: str) -> Tuple[Dict[str, str], int]:
    if not data:
        raise FormatError("empty file (0 bytes)")
    m = (magic + "\n").encode("ascii")
    if not data.startswith(m):
        raise FormatError(f"bad magic at byte offset 0: expected {magic!r}, "
                          f"got {data[:len(m)].rstrip()!r}")
    end = data.find(b"\n" + HEADER_END, 0, MAX_HEADER)
    if end < 0:
        raise FormatError(f"header terminator 'END' not found in the first {MAX_HEADER} bytes")
    payload_offset = end + 1 + len(HEADER_END)
    fields = {}
    offset = len(m)
    for raw in data[len(m):end + 1].split(b"\n")[:-1]:
        line = raw.decode("ascii", errors="replace")
        if "=" not in line:
            raise FormatError(f"malformed header line at byte offset {offset}: {line!r}")
        key, value = line.split("=", 1)
        fields[key.strip()] = value.strip()
        offset += len(raw) + 1
    return fields, payload_offset


def _require(fields, keys, magic):
    missing = [k for k in keys if k not in fields]
    if missing:
        raise FormatError(f"{magic} header missing required keys: {', '.join(missing)}")


def _int(fields, key):
    try:
        v = int(fields[key])
    except ValueError:
        raise FormatError(f"header key {key!r} is not an integer: {fields[key]!r}") from None
    if v < 1:
        raise FormatError(f"header key {key!r} must be positive, got {v}")
    return v


def _float(fields, key):
    try:
        return float(fields[key])
    except ValueError:
        raise FormatError(f"header key {key!r} is not a number: {fields[key]!r}") from None


def _payload(data, offset, count, encoding, what):
    if encoding not in _ENCODINGS:
        raise FormatError(f"unsupported sample encoding {encoding!r}")
    dtype = np.dtype(_ENCODINGS[encoding])
    expected = count * dtype.itemsize
    actual = len(data) - offset
    if actual != expected:
        kind = "truncated" if actual < expected else "oversized"
        raise FormatError(f"{kind} {what} payload at byte offset {offset}: "
                          f"expected {expected} bytes, got {actual}")
    return np.frombuffer(data, dtype=dtype, count=count, offset=offset)


def encode_ctf(ctf: ChannelTransferFunction) -> bytes:
    S, Q = ctf.shape
    header = _encode_header(CTF_MAGIC, {
        "S": str(S),
        "Q": str(Q),
        "T_s": fmt(ctf.sample_time),
        "f_s": fmt(ctf.sample_freq),
        "f_c": fmt(ctf.carrier_freq),
        "encoding": "complex128",
        "byte_order": "little",
        "layout": "time-major",
    })
    return header + ctf.samples.astype("<c16").tobytes(order="C")


def decode_ctf(data: bytes) -> ChannelTransferFunction:
    fields, off = _split_header(data, CTF_MAGIC)
    _require(fields, ("S", "Q", "T_s", "f_s", "f_c", "encoding", "byte_order", "layout"), CTF_MAGIC)
    if fields["byte_order"] != "little":
        raise FormatError(f"unsupported byte order {fields['byte_order']!r}")
    if fields["layout"] != "time-major":
        raise FormatError(f"unsupported layout {fields['layout']!r}")
    if fields["encoding"] not in ("complex128", "complex64"):
        raise FormatError(f"unsupported CTF sample encoding {fields['encoding']!r}")
    S, Q = _int(fields, "S"), _int(fields, "Q")
    raw = _payload(data, off, S * Q, fields["encoding"], "CTF")
    samples = raw.astype(np.complex128).reshape(S, Q)
    try:
        return ChannelTransferFunction(samples, _float(fields, "T_s"), _float(fields, "f_s"),
                                       _float(fields, "f_c"))
    except ValueError as exc:
        raise FormatError(f"invalid CTF content: {exc}") from None


def write_ctf(ctf: ChannelTransferFunction, path) -> None:
    atomic_write(path, encode_ctf(ctf))


def read_ctf(path) -> ChannelTransferFunction:
    return decode_ctf(read_bytes(path))


def read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None


def encode_lsf(seq: LsfSequence) -> bytes:
    K, N, M = seq.values.shape
    cfg = seq.config
    header = _encode_header(LSF_MAGIC, {
        "K": str(K),
        "N": str(N),
        "M": str(M),
        "T_s": fmt(seq.sample_time),
        "f_s": fmt(seq.sample_freq),
        "f_c": fmt(seq.carrier_freq),
        "hop": str(cfg.time_hop),
        "W_t": fmt(cfg.taper_time_bw),
        "I": str(cfg.taper_time_count),
        "W_f": fmt(cfg.taper_freq_bw),
        "J": str(cfg.taper_freq_count),
        "cutoff": fmt(cfg.cutoff),
        "encoding": "float64",
        "byte_order": "little",
        "layout": "tile-doppler-delay",
        "doppler_order": "natural",
    })
    return header + seq.values.astype("<f8").tobytes(order="C")


def decode_lsf(data: bytes) -> LsfSequence:
    fields, off = _split_header(data, LSF_MAGIC)
    _require(fields, ("K", "N", "M", "T_s", "f_s", "hop", "W_t", "I", "W_f", "J",
                      "encoding", "byte_order"), LSF_MAGIC)
    if fields["byte_order"] != "little":
        raise FormatError(f"unsupported byte order {fields['byte_order']!r}")
    K, N, M = _int(fields, "K"), _int(fields, "N"), _int(fields, "M")
    vals = _payload(data, off, K * N * M, fields["encoding"], "LSF").reshape(K, N, M)
    try:
        cfg = AnalysisConfig(
            lctf_time_len=N, lctf_freq_len=M, time_hop=_int(fields, "hop"),
            taper_time_bw=_float(fields, "W_t"), taper_time_count=_int(fields, "I"),
            taper_freq_bw=_float(fields, "W_f"), taper_freq_count=_int(fields, "J"),
            cutoff=_float(fields, "cutoff") if "cutoff" in fields else 0.9)
    except ValueError as exc:
        raise FormatError(f"invalid LSF header: {exc}") from None
    return LsfSequence(vals.astype(np.float64), cfg, _float(fields, "T_s"),
                       _float(fields, "f_s"), _float(fields, "f_c") if "f_c" in fields else 0.0)


def write_lsf(seq: LsfSequence, path) -> None:
    atomic_write(path, encode_lsf(seq))


def read_lsf(path) -> LsfSequence:
    return decode_lsf(read_bytes(path))


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

_SCALAR_KEYS = {
    "arm_radius": float, "alpha_start": float, "alpha_end": float,
    "velocity": float, "velocity_kmh": float, "carrier_freq": float,
    "bandwidth": float, "num_subcarriers": int, "num_snapshots": int,
}
_POINT_KEYS = ("arm_center", "rx_position")


def _parse_bool(text):
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_vec(text, n):
    parts = text.replace(",", " ").split()
    if len(parts) != n:
        raise ValueError(f"expected {n} numbers, got {len(parts)}")
    return tuple(float(p) for p in parts)


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Parse a scenario description.

    The format is line oriented. ``#`` starts a comment. A ``[scenario]``
    section holds ``key = value`` geometry and radio settings; each
    ``[path]`` section adds one propagation path with keys ``kind``
    (``los`` or ``single-bounce``), ``gain`` (``re im``) and, for
    single-bounce paths, ``scatterer`` (``x y z``). Errors name the line.
    """
    scalars = {}
    paths: List[dict] = []
    section = None
    seen_scenario = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        def fail(msg):
            raise FormatError(f"{source}:{lineno}: {msg}")

        if line.startswith("["):
            if not line.endswith("]"):
                fail(f"unterminated section header {line!r}")
            section = line[1:-1].strip().lower()
            if section == "scenario":
                if seen_scenario:
                    fail("duplicate [scenario] section")
                seen_scenario = True
            elif section == "path":
                paths.append({"_line": lineno})
            else:
                fail(f"unknown section [{section}]")
            continue
        if "=" not in line:
            fail(f"expected 'key = value', got {line!r}")
        if section is None:
            fail("setting outside of a section")
        key, value = (p.strip() for p in line.split("=", 1))
        try:
            if section == "scenario":
                if key in scalars:
                    fail(f"duplicate key {key!r}")
                if key in _SCALAR_KEYS:
                    scalars[key] = _SCALAR_KEYS[key](value)
                elif key in _POINT_KEYS:
                    scalars[key] = _parse_vec(value, 3)
                elif key == "free_space":
                    scalars[key] = _parse_bool(value)
                else:
                    fail(f"unknown scenario key {key!r}")
            else:
                cur = paths[-1]
                if key in cur:
                    fail(f"duplicate key {key!r}")
                if key == "kind":
                    if value not in (LOS, SINGLE_BOUNCE):
                        fail(f"unknown path kind {value!r}")
                    cur[key] = value
                elif key == "gain":
                    re, im = _parse_vec(value, 2)
                    cur[key] = complex(re, im)
                elif key == "scatterer":
                    cur[key] = _parse_vec(value, 3)
                else:
                    fail(f"unknown path key {key!r}")
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            fail(f"bad value for {key!r}: {exc}")

    if not seen_scenario:
        raise FormatError(f"{source}: missing [scenario] section")
    if "velocity" in scalars and "velocity_kmh" in scalars:
        raise FormatError(f"{source}: give either velocity or velocity_kmh, not both")
    if "velocity_kmh" in scalars:
        scalars["velocity"] = scalars.pop("velocity_kmh") / 3.6
    built = []
    for p in paths:
        line = p.pop("_line")
        try:
            built.append(PropagationPath(p.get("kind", LOS), p.get("gain", 1.0), p.get("scatterer")))
        except ValueError as exc:
            raise FormatError(f"{source}:{line}: {exc}") from None
    if built:
        scalars["paths"] = tuple(built)
    try:
        return Scenario(**scalars)
    except ValueError as exc:
        raise FormatError(f"{source}: {exc}") from None


def load_scenario(path) -> Scenario:
    data = read_bytes(path)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: scenario file is not UTF-8 text") from None
    return parse_scenario(text, str(path))


def dump_scenario(scn: Scenario) -> str:
    """Serialize a scenario in the format read by :func:`parse_scenario`."""
    def vec(v):
        return " ".join(fmt(x) for x in v)

    lines = [
        "[scenario]",
        f"arm_radius = {fmt(scn.arm_radius)}",
        f"arm_center = {vec(scn.arm_center)}",
        f"alpha_start = {fmt(scn.alpha_start)}",
        f"alpha_end = {fmt(scn.alpha_end)}",
        f"velocity = {fmt(scn.velocity)}",
        f"rx_position = {vec(scn.rx_position)}",
        f"carrier_freq = {fmt(scn.carrier_freq)}",
        f"bandwidth = {fmt(scn.bandwidth)}",
        f"num_subcarriers = {scn.num_subcarriers}",
        f"num_snapshots = {scn.num_snapshots}",
        f"free_space = {'true' if scn.free_space else 'false'}",
    ]
    for p in scn.paths:
        lines += ["", "[path]", f"kind = {p.kind}", f"gain = {fmt(p.gain.real)} {fmt(p.gain.imag)}"]
        if p.scatterer is not None:
            lines.append(f"scatterer = {vec(p.scatterer)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV / JSON output
# ---------------------------------------------------------------------------

def _csv(rows: Iterable[Sequence]) -> str:
    return "".join(",".join(str(c) for c in row) + "\n" for row in rows)


def collinearity_csv(gamma: np.ndarray, angles: Optional[np.ndarray] = None) -> str:
    """One row per reference tile; the header lists the compared tile indices."""
    K = gamma.shape[0]
    head = ["k_t"] + (["angle_deg"] if angles is not None else []) + [str(k) for k in range(1, K + 1)]
    rows = [head]
    for i in range(K):
        lead = [str(i + 1)] + ([fmt(angles[i])] if angles is not None else [])
        rows.append(lead + [fmt(x) for x in gamma[i]])
    return _csv(rows)


def stationarity_csv(result, angles: Optional[np.ndarray] = None) -> str:
    head = ["k_t"] + (["angle_deg"] if angles is not None else []) + [
        "run_length", "t_stat_seconds", "censored"]
    rows = [head]
    for i in range(len(result)):
        lead = [str(i + 1)] + ([fmt(angles[i])] if angles is not None else [])
        rows.append(lead + [str(int(result.run_length[i])), fmt(result.t_stat[i]),
                            str(int(bool(result.censored[i])))])
    return _csv(rows)


def lsf_tile_csv(seq: LsfSequence, k_t: int) -> str:
    """LSF of one tile with Doppler rows ordered negative to positive."""
    vals = np.fft.fftshift(seq.tile(k_t), axes=0)
    rows = [["doppler_hz"] + [fmt(d) for d in seq.delay_axis()]]
    for f, row in zip(seq.doppler_axis(), vals):
        rows.append([fmt(f)] + [fmt(x) for x in row])
    return _csv(rows)


def dpss_csv(tapers) -> str:
    rows = [["index", "lambda"] + [f"u{n}" for n in range(tapers.length)]]
    for i, (lam, t) in enumerate(zip(tapers.concentrations, tapers.tapers)):
        rows.append([str(i), fmt(lam)] + [fmt(x) for x in t])
    return _csv(rows)


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def manifest(config: Optional[dict], inputs: Dict[str, str], outputs: Dict[str, str],
             command: str, timestamp: bool = True) -> dict:
    """Reproducibility record for one CLI invocation.

    `inputs` and `outputs` map file names to SHA-256 digests.
    """
    from chanstat import __version__

    doc = {
        "tool": "chanstat",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
    }
    if timestamp:
        doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return doc
