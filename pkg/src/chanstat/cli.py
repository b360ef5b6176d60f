"""Command line interface.

Subcommands: ``synth``, ``dpss``, ``lsf``, ``collinearity``, ``stationarity``
and ``pipeline``. Exit codes: 0 success, 2 configuration error, 3 format
error, 4 numerical degeneracy.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from chanstat import io
from chanstat.data import AnalysisConfig
from chanstat.dpss import generate_dpss
from chanstat.errors import ChanstatError, ConfigError
from chanstat.lsf import lsf_sequence
from chanstat.stationarity import collinearity_matrix, index_to_angle, stationarity
from chanstat.synth import PRESETS, preset, synth_ctf

log = logging.getLogger("chanstat")


def _add_source(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--input", "-i", help="CTF container file")
    g.add_argument("--preset", choices=PRESETS, help="synthesize a built-in channel")
    g.add_argument("--scenario", help="synthesize from a scenario description file")


def _add_config(p):
    p.add_argument("--n", type=int, default=25, help="LCTF length N in snapshots")
    p.add_argument("--m", type=int, default=None, help="LCTF width M in subcarriers (default Q)")
    p.add_argument("--hop", type=int, default=2, help="time hop between tiles in snapshots")
    p.add_argument("--wt", type=float, default=2.0, help="time DPSS half-bandwidth in bins")
    p.add_argument("--tapers-t", type=int, default=2, help="number of time tapers I")
    p.add_argument("--wf", type=float, default=1.0, help="frequency DPSS half-bandwidth in bins")
    p.add_argument("--tapers-f", type=int, default=1, help="number of frequency tapers J")
    p.add_argument("--cutoff", type=float, default=0.9, help="collinearity cutoff")


def _add_common(p):
    p.add_argument("--errors-json", action="store_true",
                   help="report failures as a JSON object on stderr")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the timestamp from manifests (byte-stable output)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chanstat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a channel and write a CTF container")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", choices=PRESETS)
    g.add_argument("--scenario")
    p.add_argument("--output", "-o", required=True)
    _add_common(p)

    p = sub.add_parser("dpss", help="dump DPSS tapers and concentrations as CSV")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--w", type=float, required=True, help="half-bandwidth in DFT bins")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--output", "-o", help="CSV file (default stdout)")
    _add_common(p)

    p = sub.add_parser("lsf", help="estimate the LSF sequence of a channel")
    _add_source(p)
    _add_config(p)
    p.add_argument("--output", "-o", required=True, help="LSF container file")
    p.add_argument("--tile-csv", help="directory for one CSV per tile")
    _add_common(p)

    p = sub.add_parser("collinearity", help="collinearity matrix of an LSF sequence")
    p.add_argument("--lsf", required=True, help="LSF container file")
    p.add_argument("--output", "-o", required=True, help="CSV file")
    _add_common(p)

    p = sub.add_parser("stationarity", help="stationarity time per tile")
    p.add_argument("--lsf", required=True, help="LSF container file")
    p.add_argument("--cutoff", type=float, default=None,
                   help="collinearity cutoff (default: value stored with the LSF)")
    p.add_argument("--two-sided", action="store_true", help="extend runs backwards as well")
    p.add_argument("--angles", action="store_true", help="attach arm angles (needs geometry)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--geometry-preset", choices=sorted(set(PRESETS) - {"jakes-wssus"}))
    g.add_argument("--geometry", help="scenario file providing the arm geometry")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)

    p = sub.add_parser("pipeline", help="synth/ingest -> lsf -> collinearity -> stationarity")
    _add_source(p)
    _add_config(p)
    p.add_argument("--two-sided", action="store_true", help="extend runs backwards as well")
    p.add_argument("--angles", action="store_true",
                   help="attach arm angles (scenario or geometric preset input only)")
    p.add_argument("--tile-csv", action="store_true", help="also write one CSV per tile")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    return parser


def _config(args) -> AnalysisConfig:
    return AnalysisConfig(
        lctf_time_len=args.n, lctf_freq_len=args.m, time_hop=args.hop,
        taper_time_bw=args.wt, taper_time_count=args.tapers_t,
        taper_freq_bw=args.wf, taper_freq_count=args.tapers_f, cutoff=args.cutoff)


def _scenario_source(args):
    if args.preset:
        ctf, scn = preset(args.preset)
        return ctf, scn
    scn = io.load_scenario(args.scenario)
    return synth_ctf(scn), scn


def _geometry(args):
    if getattr(args, "geometry_preset", None):
        return preset(args.geometry_preset)[1]
    if getattr(args, "geometry", None):
        return io.load_scenario(args.geometry)
    return None


def _write_manifest(out_path, args, config, inputs, outputs):
    doc = io.manifest(config, inputs, outputs, args.command, timestamp=not args.no_timestamp)
    io.atomic_write(out_path, io.to_json(doc))


def cmd_synth(args):
    ctf, scn = _scenario_source(args)
    data = io.encode_ctf(ctf)
    io.atomic_write(args.output, data)
    out = Path(args.output)
    source = {"preset:" + args.preset: io.sha256_bytes(args.preset.encode())} if args.preset \
        else {Path(args.scenario).name: io.sha256_file(args.scenario)}
    _write_manifest(out.with_name(out.name + ".manifest.json"), args, None, source,
                    {out.name: io.sha256_bytes(data)})
    log.info("wrote %s (S=%d, Q=%d)", out, *ctf.shape)


def cmd_dpss(args):
    tapers = generate_dpss(args.length, args.w, args.count)
    text = io.dpss_csv(tapers)
    if args.output:
        io.atomic_write(args.output, text)
    else:
        sys.stdout.write(text)


def _load_ctf(args):
    """CTF plus (name, digest) of the input it came from and optional geometry."""
    if args.input:
        data = io.read_bytes(args.input)
        return io.decode_ctf(data), None, (Path(args.input).name, io.sha256_bytes(data))
    ctf, scn = _scenario_source(args)
    return ctf, scn, None


def _write_tiles(seq, directory):
    d = Path(directory)
    outputs = {}
    for k in range(1, len(seq) + 1):
        name = f"lsf_k{k:04d}.csv"
        text = io.lsf_tile_csv(seq, k)
        io.atomic_write(d / name, text)
        outputs[f"{d.name}/{name}"] = io.sha256_bytes(text.encode())
    return outputs


def cmd_lsf(args):
    cfg = _config(args)
    ctf, _, src = _load_ctf(args)
    if src is None:
        data = io.encode_ctf(ctf)
        src = ("synthesized.ctf", io.sha256_bytes(data))
    seq = lsf_sequence(ctf, cfg)
    blob = io.encode_lsf(seq)
    io.atomic_write(args.output, blob)
    out = Path(args.output)
    outputs = {out.name: io.sha256_bytes(blob)}
    if args.tile_csv:
        outputs.update(_write_tiles(seq, args.tile_csv))
    _write_manifest(out.with_name(out.name + ".manifest.json"), args, seq.config.as_dict(),
                    {src[0]: src[1]}, outputs)


def cmd_collinearity(args):
    data = io.read_bytes(args.lsf)
    seq = io.decode_lsf(data)
    coll = collinearity_matrix(seq)
    text = io.collinearity_csv(coll.values)
    io.atomic_write(args.output, text)
    out = Path(args.output)
    _write_manifest(out.with_name(out.name + ".manifest.json"), args, seq.config.as_dict(),
                    {Path(args.lsf).name: io.sha256_bytes(data)},
                    {out.name: io.sha256_bytes(text.encode())})


def _angles(args, scn, cfg, K):
    if not args.angles:
        return None
    if scn is None:
        raise ConfigError("--angles needs rotary-arm geometry (scenario or geometric preset)")
    return index_to_angle(np.arange(1, K + 1), scn, cfg)


def _emit_results(out_dir, seq, cutoff, two_sided, angles):
    coll = collinearity_matrix(seq)
    res = stationarity(coll, cutoff, two_sided=two_sided)
    files = {
        "collinearity.csv": io.collinearity_csv(coll.values, angles),
        "stationarity.csv": io.stationarity_csv(res, angles),
    }
    summary = res.summary()
    summary["sample_time"] = seq.sample_time
    summary["lctf_duration"] = seq.config.lctf_time_len * seq.sample_time
    summary["min_collinearity_to_next"] = (
        float(np.min(np.diag(coll.values, 1))) if len(coll) > 1 else 1.0)
    files["summary.json"] = io.to_json(summary)
    digests = {}
    for name, text in files.items():
        io.atomic_write(Path(out_dir) / name, text)
        digests[name] = io.sha256_bytes(text.encode())
    return res, digests


def cmd_stationarity(args):
    data = io.read_bytes(args.lsf)
    seq = io.decode_lsf(data)
    cutoff = seq.config.cutoff if args.cutoff is None else args.cutoff
    scn = _geometry(args)
    angles = _angles(args, scn, seq.config, len(seq))
    res, digests = _emit_results(args.out, seq, cutoff, args.two_sided, angles)
    cfg = dict(seq.config.as_dict(), cutoff=cutoff, two_sided=args.two_sided)
    _write_manifest(Path(args.out) / "manifest.json", args, cfg,
                    {Path(args.lsf).name: io.sha256_bytes(data)}, digests)
    print(json.dumps(res.summary(), sort_keys=True))


def cmd_pipeline(args):
    cfg = _config(args)
    out = Path(args.out)
    ctf, scn, src = _load_ctf(args)
    outputs = {}
    if src is None:
        blob = io.encode_ctf(ctf)
        io.atomic_write(out / "ctf.bin", blob)
        src = ("ctf.bin", io.sha256_bytes(blob))
        if scn is not None:
            text = io.dump_scenario(scn)
            io.atomic_write(out / "scenario.txt", text)
            outputs["scenario.txt"] = io.sha256_bytes(text.encode())
    seq = lsf_sequence(ctf, cfg)
    blob = io.encode_lsf(seq)
    io.atomic_write(out / "lsf.bin", blob)
    outputs["lsf.bin"] = io.sha256_bytes(blob)
    if args.tile_csv:
        outputs.update(_write_tiles(seq, out / "tiles"))
    angles = _angles(args, scn, seq.config, len(seq))
    res, digests = _emit_results(out, seq, cfg.cutoff, args.two_sided, angles)
    outputs.update(digests)
    conf = dict(seq.config.as_dict(), two_sided=args.two_sided)
    if args.preset:
        conf["preset"] = args.preset
    _write_manifest(out / "manifest.json", args, conf, {src[0]: src[1]}, outputs)
    print(json.dumps(res.summary(), sort_keys=True))


COMMANDS = {
    "synth": cmd_synth,
    "dpss": cmd_dpss,
    "lsf": cmd_lsf,
    "collinearity": cmd_collinearity,
    "stationarity": cmd_stationarity,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ChanstatError, IndexError) as exc:
        code = getattr(exc, "exit_code", ConfigError.exit_code)
        kind = getattr(exc, "kind", "config")
        if args.errors_json:
            doc = {"error": kind, "message": str(exc), "exit_code": code}
            tile = getattr(exc, "tile", None)
            if tile is not None:
                doc["tile"] = tile
            sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")
        else:
            sys.stderr.write(f"chanstat: {kind} error: {exc}\n")
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
