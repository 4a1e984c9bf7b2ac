"""Command-line entry point: simulate, mix, encode, edit, decode, eval, render.

Exit codes: 0 success, 2 contract violation, 3 remote-service failure,
4 replay miss, 5 schema failure.
"""

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import core, decoder, encoder, evaluate, formats
from .errors import (
    ContractError,
    DecodeError,
    FcmError,
    RemoteServiceError,
    ReplayMissError,
    SchemaError,
)
from .hedges import default_hedge_table, load_hedge_table
from .llm import LlmClient, LlmConfig
from .negation import DEFAULT_NEGATION_MARKERS


@dataclass
class RunManifest:
    """What a pipeline run consumed and produced, for auditability."""

    inputs: dict = field(default_factory=dict)
    stages: list = field(default_factory=list)
    config_fingerprints: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def write(self, path):
        for out in self.outputs:
            if not Path(out).exists():
                raise ContractError(f"manifest lists missing output {out}")
        payload = {
            "inputs": self.inputs,
            "stages": self.stages,
            "config_fingerprints": self.config_fingerprints,
            "outputs": self.outputs,
            "timings": self.timings,
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _add_client_flags(parser):
    parser.add_argument("--offline", action="store_true",
                        help="deterministic codec only; never touch the network")
    parser.add_argument("--replay-only", action="store_true",
                        help="serve completions from the cache; a miss is an error")
    parser.add_argument("--endpoint", default="")
    parser.add_argument("--model", default="gemini-2.5-pro")
    parser.add_argument("--temperature", type=float, default=0.0)
    parser.add_argument("--top-p", type=float, default=0.95)
    parser.add_argument("--cache-dir", default=None)


def _add_table_flags(parser):
    parser.add_argument("--hedge-table", default=None,
                        help="JSON hedge-table file overriding the default bins")
    parser.add_argument("--negation-lexicon", default=None,
                        help="JSON list of leading negation markers")


def _table_from(args):
    if getattr(args, "hedge_table", None):
        return load_hedge_table(args.hedge_table)
    return default_hedge_table()


def _markers_from(args):
    lex = getattr(args, "negation_lexicon", None)
    if lex:
        with open(lex, encoding="utf-8") as fh:
            markers = json.load(fh)
        if not isinstance(markers, list) or not all(isinstance(m, str) for m in markers):
            raise ContractError("negation lexicon must be a JSON list of strings")
        return tuple(markers)
    return DEFAULT_NEGATION_MARKERS


def _client_from(args) -> LlmClient:
    if args.offline:
        raise ContractError("this stage needs a client but --offline was given")
    config = LlmConfig(
        endpoint=args.endpoint,
        model=args.model,
        temperature=args.temperature,
        top_p=args.top_p,
    )
    return LlmClient(config, cache_dir=args.cache_dir, replay_only=args.replay_only)


def _parse_initial(raw: str, n: int) -> np.ndarray:
    if raw == "zeros":
        return np.zeros(n)
    if raw == "ones":
        return np.ones(n)
    values = np.array([float(x) for x in raw.split(",")])
    if values.shape != (n,):
        raise ContractError(f"initial state needs {n} components, got {values.size}")
    return values


def _squash_from(args) -> core.Squash:
    if args.squash == "logistic":
        return core.Squash.logistic(steepness=args.steepness)
    if args.squash == "threshold":
        return core.Squash.threshold(cutoff=args.cutoff)
    return core.Squash.clipped_linear()


def cmd_simulate(args) -> int:
    fcm = formats.load_fcm(args.fcm)
    squash = _squash_from(args)
    initial = _parse_initial(args.initial, fcm.n)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    states = core.trajectory(fcm, initial, squash, args.max_steps, tol=args.tol)
    eq = core.find_equilibrium(fcm, initial, squash, args.max_steps, tol=args.tol)
    formats.save_matrix_csv(np.vstack(states), out_dir / "trajectory.csv")
    payload = _equilibrium_payload(eq)
    (out_dir / "equilibrium.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )
    print(f"{payload['kind']} after {len(states) - 1} steps; files in {out_dir}")
    return 0


def _equilibrium_payload(eq) -> dict:
    if isinstance(eq, core.FixedPoint):
        return {"kind": "fixed_point", "state": [float(x) for x in eq.state]}
    if isinstance(eq, core.LimitCycle):
        return {
            "kind": "limit_cycle",
            "period": eq.period,
            "states": [[float(x) for x in s] for s in eq.states],
        }
    return {
        "kind": "non_convergent",
        "steps_run": eq.steps_run,
        "last_state": [float(x) for x in eq.last_state],
    }


def cmd_mix(args) -> int:
    fcms = [formats.load_fcm(p) for p in args.fcms]
    weights = [float(x) for x in args.weights.split(",")]
    mixed = core.mix(fcms, weights)
    formats.save_fcm(mixed, args.out)
    print(f"mixed {len(fcms)} maps into {args.out} ({mixed.n} nodes)")
    return 0


def cmd_encode(args) -> int:
    fcm = formats.load_fcm(args.fcm)
    table = _table_from(args)
    if args.offline:
        summary = encoder.deterministic_encode(fcm, table)
    else:
        summary = encoder.llm_encode(fcm, _client_from(args))
    formats.save_summary(summary, args.out)
    print(f"wrote stage-{summary.stage} summary ({summary.word_count} words) to {args.out}")
    return 0


def cmd_edit(args) -> int:
    summary = formats.load_summary(args.summary)
    table = _table_from(args)
    if args.offline:
        edited = encoder.deterministic_content_edit(summary, table)
    else:
        edited = encoder.llm_content_edit(summary, _client_from(args))
    formats.save_summary(edited, args.out)
    print(f"wrote stage-{edited.stage} summary ({edited.word_count} words) to {args.out}")
    return 0


def cmd_decode(args) -> int:
    summary = formats.load_summary(args.summary)
    table = _table_from(args)
    markers = _markers_from(args)
    if args.offline:
        result = decoder.deterministic_decode(summary.text, table=table, markers=markers)
    else:
        result = decoder.llm_decode(summary.text, _client_from(args), table=table)
    formats.save_fcm(result.fcm, args.out)
    _write_evidence(result, Path(args.out))
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"decoded {result.fcm.n} nodes, "
          f"{int(np.count_nonzero(result.fcm.edges))} edges into {args.out}")
    return 0


def _write_evidence(result: decoder.DecodeResult, fcm_path: Path):
    sidecar = fcm_path.with_suffix(fcm_path.suffix + ".evidence.json")
    payload = {
        "edges": [
            {
                "source": e.source_label,
                "target": e.target_label,
                "weight": e.weight,
                "evidence": e.evidence,
            }
            for e in result.edges
        ],
        "warnings": list(result.warnings),
        "pairs_examined": result.pairs_examined,
    }
    sidecar.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def cmd_eval(args) -> int:
    target = formats.load_fcm(args.target)
    recon = formats.load_fcm(args.recon)
    report = evaluate.evaluate_reconstruction(
        target,
        recon,
        markers=_markers_from(args),
        strong_threshold=args.strong_threshold,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    formats.export_report(report, out_dir / "report.json", style="structured")
    formats.export_report(report, out_dir / "report.txt", style="human-table")
    print(f"norms raw: {report.norms_raw}")
    print(f"norms adjusted: {report.norms_adjusted}")
    print(f"strong-edge preservation: {report.strong_edge_preservation:.3f}")
    return 0


def cmd_render(args) -> int:
    labels = None
    path = Path(args.matrix)
    if path.suffix.lower() != ".csv" and args.show_labels:
        labels = formats.load_fcm(path).labels
    matrix = formats.load_matrix(path)
    formats.render_heatmap(matrix, args.out, cell_size=args.cell_size, labels=labels)
    print(f"rendered {matrix.shape[0]}x{matrix.shape[1]} heatmap to {args.out}")
    return 0


def cmd_roundtrip(args) -> int:
    manifest = RunManifest(inputs={"fcm": str(args.fcm)})
    table = _table_from(args)
    markers = _markers_from(args)
    target = formats.load_fcm(args.fcm)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    client = None
    if not args.offline:
        client = _client_from(args)
        manifest.config_fingerprints["client"] = client.fingerprint("")
    else:
        manifest.config_fingerprints["client"] = "offline"

    def run_stage(name, fn):
        start = time.monotonic()
        value = fn()
        manifest.stages.append(name)
        manifest.timings[name] = round(time.monotonic() - start, 6)
        return value

    def emit(path):
        manifest.outputs.append(str(path))

    heatmap_target = out_dir / "heatmap_target.png"
    formats.render_heatmap(target.edges, heatmap_target)
    emit(heatmap_target)

    if args.offline:
        latent1 = run_stage("encode", lambda: encoder.deterministic_encode(target, table))
    else:
        latent1 = run_stage("encode", lambda: encoder.llm_encode(target, client))
    latent1_path = out_dir / "latent1.txt"
    formats.save_summary(latent1, latent1_path)
    emit(latent1_path)
    emit(latent1_path.with_suffix(".txt.meta.json"))

    variants = [("latent1", latent1)]
    if args.edit:
        if args.offline:
            latent2 = run_stage(
                "edit", lambda: encoder.deterministic_content_edit(latent1, table)
            )
        else:
            latent2 = run_stage("edit", lambda: encoder.llm_content_edit(latent1, client))
        latent2_path = out_dir / "latent2.txt"
        formats.save_summary(latent2, latent2_path)
        emit(latent2_path)
        emit(latent2_path.with_suffix(".txt.meta.json"))
        variants.append(("latent2", latent2))

    table_columns = {}
    for name, summary in variants:
        if args.offline:
            result = run_stage(
                f"decode_{name}",
                lambda s=summary: decoder.deterministic_decode(
                    s.text, table=table, markers=markers
                ),
            )
        else:
            result = run_stage(
                f"decode_{name}",
                lambda s=summary: decoder.llm_decode(s.text, client, table=table),
            )
        recon_path = out_dir / f"recon_{name}.json"
        formats.save_fcm(result.fcm, recon_path)
        _write_evidence(result, recon_path)
        emit(recon_path)
        emit(recon_path.with_suffix(".json.evidence.json"))

        report = run_stage(
            f"eval_{name}",
            lambda r=result: evaluate.evaluate_reconstruction(
                target, r.fcm, markers=markers, strong_threshold=args.strong_threshold
            ),
        )
        report_path = out_dir / f"report_{name}.json"
        formats.export_report(report, report_path, style="structured")
        emit(report_path)
        heat_raw = out_dir / f"heatmap_recon_{name}.png"
        formats.render_heatmap(report.recon_matrix, heat_raw)
        emit(heat_raw)
        heat_adj = out_dir / f"heatmap_adjusted_{name}.png"
        formats.render_heatmap(report.adjusted_matrix, heat_adj)
        emit(heat_adj)
        table_columns[name] = report.norms_raw
        table_columns[f"{name} adjusted"] = report.norms_adjusted

    norms_path = out_dir / "report.txt"
    formats.export_norms_table(table_columns, norms_path)
    emit(norms_path)
    manifest.write(out_dir / "manifest.json")
    print(f"roundtrip complete; artifacts in {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fcmcodec",
        description="Simulate causal concept maps and round-trip them through text",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the discrete-time dynamics of a map")
    p.add_argument("--fcm", required=True)
    p.add_argument("--initial", default="ones",
                   help="comma-separated state, or 'zeros'/'ones'")
    p.add_argument("--squash", choices=["logistic", "threshold", "clipped-linear"],
                   default="logistic")
    p.add_argument("--steepness", type=float, default=5.0)
    p.add_argument("--cutoff", type=float, default=0.0)
    p.add_argument("--max-steps", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("mix", help="convex-combine maps over their union node set")
    p.add_argument("fcms", nargs="+")
    p.add_argument("--weights", required=True, help="comma-separated convex weights")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_mix)

    p = sub.add_parser("encode", help="map an FCM to a text summary")
    p.add_argument("--fcm", required=True)
    p.add_argument("--out", required=True)
    _add_client_flags(p)
    _add_table_flags(p)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("edit", help="rewrite a stage-I summary for naturalness")
    p.add_argument("--summary", required=True)
    p.add_argument("--out", required=True)
    _add_client_flags(p)
    _add_table_flags(p)
    p.set_defaults(fn=cmd_edit)

    p = sub.add_parser("decode", help="reconstruct an FCM from a text summary")
    p.add_argument("--summary", required=True)
    p.add_argument("--out", required=True)
    _add_client_flags(p)
    _add_table_flags(p)
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("roundtrip",
                       help="encode, optionally edit, decode, evaluate, render")
    p.add_argument("--fcm", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--edit", action="store_true")
    p.add_argument("--strong-threshold", type=float, default=0.5)
    _add_client_flags(p)
    _add_table_flags(p)
    p.set_defaults(fn=cmd_roundtrip)

    p = sub.add_parser("eval", help="score a reconstruction against its target")
    p.add_argument("--target", required=True)
    p.add_argument("--recon", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--strong-threshold", type=float, default=0.5)
    _add_table_flags(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("render", help="render an edge matrix as a heatmap")
    p.add_argument("--matrix", required=True, help="FCM document or matrix CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--cell-size", type=int, default=24)
    p.add_argument("--show-labels", action="store_true")
    p.set_defaults(fn=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ReplayMissError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except RemoteServiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ContractError, DecodeError, FcmError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
