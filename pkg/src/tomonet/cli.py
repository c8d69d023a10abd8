"""Command-line experiment harness.

Verbs: generate, train, table, sweep, fixtures, report.  Every command is
deterministic given its flags and seeds.  Exit codes: 0 success, 2 config
error, 3 missing artifact, 4 fidelity-threshold failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from importlib import resources

import numpy as np

from . import data as data_mod
from . import fixtures as fixtures_mod
from .measurement import (
    add_readout_noise,
    assemble_b,
    build_A,
    linear_inversion_qst,
    readout_length,
    standard_settings,
)
from .metrics import ensemble_stats, repeated_mask_fidelity
from .network import (
    NetworkConfig,
    TrainConfig,
    init_network,
    load_checkpoint,
    predict_process,
    predict_state,
    save_checkpoint,
    train,
)
from .process import channel_lambda, linear_inversion_qpt, vec_to_chi
from .quantum import fidelity, pauli_reconstruct

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_THRESHOLD = 4

TASKS = {
    "qst2": {
        "kind": "qst", "n_qubits": 2, "hidden": (100, 100, 50),
        "target_scale": 4.0, "default_mdata": 20, "default_repeats": 50,
    },
    "qst3": {
        "kind": "qst", "n_qubits": 3, "hidden": (300, 200, 100),
        "target_scale": 8.0, "default_mdata": 120, "default_repeats": 50,
    },
    "qpt2": {
        "kind": "qpt", "n_qubits": 2, "hidden": (600, 400, 300),
        "target_scale": 16.0, "default_mdata": 200, "default_repeats": 300,
    },
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _task(name: str) -> dict:
    if name not in TASKS:
        raise CliError(f"unknown task {name!r}", EXIT_CONFIG)
    return TASKS[name]


def _input_length(task: dict) -> int:
    if task["kind"] == "qst":
        return readout_length(task["n_qubits"])
    return 4 ** task["n_qubits"] * 4 ** task["n_qubits"]


def _output_length(task: dict) -> int:
    if task["kind"] == "qst":
        return 4 ** task["n_qubits"]
    return (4 ** task["n_qubits"]) ** 2


def _dataset_path(out: str, name: str, size: int) -> str:
    return os.path.join(out, f"{name}_{size}.tnds")


def _checkpoint_path(out: str, name: str, size: int, epochs: int) -> str:
    return os.path.join(out, f"{name}_s{size}_e{epochs}.tnck")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise CliError(f"bad integer list {text!r}", EXIT_CONFIG) from exc


def _workers() -> int:
    return max(1, int(os.environ.get("TOMONET_WORKERS", "1")))


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    task = _task(args.task)
    sizes = _int_list(args.sizes)
    if not sizes:
        raise CliError("no dataset sizes given", EXIT_CONFIG)
    policy = data_mod.normalize_policy(args.mdata)
    os.makedirs(args.out, exist_ok=True)
    manifest = {
        "task": args.task,
        "mdata": policy if not isinstance(policy, tuple) else list(policy),
        "noise_sigma": args.noise_sigma,
        "seed": args.seed,
        "files": {},
    }
    for size in sizes:
        if task["kind"] == "qst":
            ds = data_mod.gen_qst_dataset(
                task["n_qubits"], size, policy, args.noise_sigma,
                args.pure_fraction, seed=args.seed, workers=_workers(),
            )
        else:
            ds = data_mod.gen_qpt_dataset(
                task["n_qubits"], size, policy, args.noise_sigma,
                seed=args.seed, workers=_workers(),
            )
        path = _dataset_path(args.out, args.task, size)
        data_mod.save_dataset(ds, path)
        manifest["files"][os.path.basename(path)] = _sha256(path)
        print(f"wrote {path} ({size} samples)")
    mpath = os.path.join(args.out, f"{args.task}_manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"wrote {mpath}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train


def _network_config(task: dict, seed: int) -> NetworkConfig:
    sizes = (_input_length(task), *task["hidden"], _output_length(task))
    return NetworkConfig(layer_sizes=sizes, seed=seed)


def cmd_train(args) -> int:
    task = _task(args.task)
    sizes = _int_list(args.sizes)
    epoch_grid = sorted(set(_int_list(args.epochs)))
    if not sizes or not epoch_grid:
        raise CliError("need at least one size and one epoch count", EXIT_CONFIG)
    os.makedirs(args.out, exist_ok=True)
    for size in sizes:
        ds_path = _dataset_path(args.out, args.task, size)
        if not os.path.exists(ds_path):
            raise CliError(f"missing dataset {ds_path}", EXIT_MISSING)
        ds = data_mod.load_dataset(ds_path)
        cfg = _network_config(task, args.seed)
        params = init_network(cfg, np.random.default_rng(args.seed))
        history = []
        prev = 0
        for epochs in epoch_grid:
            tcfg = TrainConfig(
                epochs=epochs - prev, batch_size=args.batch_size, eta=args.eta,
                target_scale=task["target_scale"], seed=args.seed + prev,
                accumulator_init=0.0 if prev else 0.1,
            )
            chunk = train(params, ds.inputs, ds.targets, tcfg, alpha=cfg.alpha)
            for row in chunk:
                row["epoch"] += prev
            history.extend(chunk)
            prev = epochs
            save_tcfg = TrainConfig(
                epochs=epochs, batch_size=args.batch_size, eta=args.eta,
                target_scale=task["target_scale"], seed=args.seed,
            )
            cpath = _checkpoint_path(args.out, args.task, size, epochs)
            save_checkpoint(cpath, params, cfg, save_tcfg, epochs)
            print(f"wrote {cpath}")
        _write_csv(
            os.path.join(args.out, f"{args.task}_{size}_history.csv"),
            ["epoch", "train_mse", "val_cosine_loss"],
            [[r["epoch"], repr(r["train_mse"]), repr(r["val_cosine_loss"])] for r in history],
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluation helpers


def _gen_test_items(task: dict, count: int, seed: int):
    """Fresh synthetic test items: (full data vector, ground-truth matrix)."""
    n = task["n_qubits"]
    items = []
    if task["kind"] == "qst":
        settings = standard_settings(n)
        for i in range(count):
            rng = np.random.default_rng([seed, 7_000_000 + i])
            rho = (data_mod.random_pure_state(n, rng) if rng.random() < 0.5
                   else data_mod.random_mixed_state(n, rng))
            items.append((assemble_b(rho, settings), rho))
    else:
        from .quantum import apply_unitary, random_unitary

        for i in range(count):
            rng = np.random.default_rng([seed, 7_000_000 + i])
            u = random_unitary(n, rng)
            lam = channel_lambda(lambda r: apply_unitary(r, u), n)
            items.append((lam, linear_inversion_qpt(lam, n)))
    return items


def _predictor(task: dict, params, alpha: float):
    n, scale = task["n_qubits"], task["target_scale"]
    if task["kind"] == "qst":
        return lambda values: predict_state(params, values, n, scale, alpha)[0]
    return lambda values: predict_process(params, values, n, scale, alpha)


def _load_ckpt(path: str):
    if not os.path.exists(path):
        raise CliError(f"missing checkpoint {path}", EXIT_MISSING)
    params, cfg, tcfg, _ = load_checkpoint(path)
    return params, cfg


def cmd_table(args) -> int:
    task = _task(args.task)
    sizes = _int_list(args.sizes)
    epoch_grid = _int_list(args.epochs)
    m_data = int(args.mdata)
    items = _gen_test_items(task, args.test_count, args.test_seed)
    rows = []
    worst = 1.0
    for size in sizes:
        row = [size]
        for epochs in epoch_grid:
            params, cfg = _load_ckpt(_checkpoint_path(args.out, args.task, size, epochs))
            predict = _predictor(task, params, cfg.alpha)
            fids = []
            for i, (full, truth) in enumerate(items):
                rng = np.random.default_rng([args.test_seed, 9_000_000 + i])
                from .measurement import reduce_vector

                red = reduce_vector(full, m_data, rng)
                fids.append(fidelity(predict(red.values), truth))
            cell = float(np.mean(fids))
            worst = min(worst, cell)
            row.append(f"{cell:.4f}")
        rows.append(row)
        print("table row:", row)
    path = os.path.join(args.out, f"{args.task}_table.csv")
    _write_csv(path, ["size"] + [f"epoch_{e}" for e in epoch_grid], rows)
    print(f"wrote {path}")
    if args.min_fidelity is not None and worst < args.min_fidelity:
        raise CliError(
            f"table cell {worst:.4f} below threshold {args.min_fidelity}", EXIT_THRESHOLD
        )
    return EXIT_OK


def cmd_sweep(args) -> int:
    task = _task(args.task)
    mdata_list = _int_list(args.mdata)
    full_len = _input_length(task)
    if any(m > full_len for m in mdata_list):
        raise CliError(f"m_data exceeds full vector length {full_len}", EXIT_CONFIG)
    params, cfg = _load_ckpt(args.checkpoint)
    predict = _predictor(task, params, cfg.alpha)
    items = _gen_test_items(task, args.test_count, args.test_seed)
    rows = []
    for m in mdata_list:
        per_item = []
        for i, (full, truth) in enumerate(items):
            rng = np.random.default_rng([args.test_seed, 11_000_000 + i, m])
            per_item.append(
                repeated_mask_fidelity(full, predict, truth, m, args.repeats, rng)
            )
        stats = ensemble_stats(per_item)
        rows.append([m, f"{stats.mean:.6f}", f"{stats.std:.6f}"])
        print(f"sweep m_data={m}: mean {stats.mean:.4f} std {stats.std:.4f}")
    path = os.path.join(args.out, f"{args.task}_sweep.csv")
    _write_csv(path, ["m_data", "mean_fidelity", "std_fidelity"], rows)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_fixtures(args) -> int:
    task = _task(args.task)
    n = task["n_qubits"]
    params, cfg = _load_ckpt(args.checkpoint)
    predict = _predictor(task, params, cfg.alpha)
    mdata_list = _int_list(args.mdata) if args.mdata else []
    rng = np.random.default_rng(args.seed)

    if task["kind"] == "qst":
        settings = standard_settings(n)
        A = build_A(settings)
        named = []
        for name, rho in fixtures_mod.state_library(n).items():
            full = add_readout_noise(assemble_b(rho, settings), args.noise_sigma, rng)
            named.append((name, full, linear_inversion_qst(full, A)))
    else:
        named = []
        for name, chan in fixtures_mod.process_library().items():
            lam = channel_lambda(chan, n)
            lam = lam + args.noise_sigma * rng.standard_normal(len(lam))
            named.append((name, lam, linear_inversion_qpt(lam, n)))

    rows = []
    worst_full = 1.0
    for name, full, reference in named:
        f_full = fidelity(predict(full), reference)
        worst_full = min(worst_full, f_full)
        rows.append([name, "full", f"{f_full:.6f}", ""])
        for m in mdata_list:
            item_rng = np.random.default_rng([args.seed, 13_000_000, m])
            mean = repeated_mask_fidelity(full, predict, reference, m, args.repeats, item_rng)
            rows.append([name, m, f"{mean:.6f}", ""])
        print(f"fixture {name}: full-data fidelity {f_full:.4f}")
    path = os.path.join(args.out, f"{args.task}_fixtures.csv")
    _write_csv(path, ["fixture", "m_data", "mean_fidelity", "std_fidelity"], rows)
    print(f"wrote {path}")
    if args.min_fidelity is not None and worst_full < args.min_fidelity:
        raise CliError(
            f"fixture fidelity {worst_full:.4f} below {args.min_fidelity}", EXIT_THRESHOLD
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def _read_csv(path: str):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return {"columns": header, "rows": [list(r) for r in reader]}


def cmd_report(args) -> int:
    run = args.out
    if not os.path.isdir(run):
        raise CliError(f"run directory {run} does not exist", EXIT_MISSING)
    expected = [s for s in (args.expect or "").split(",") if s]
    contents = sorted(f for f in os.listdir(run) if f != "report.json")
    report = {"version": "tomonet-0.1.0", "run_dir_contents": contents,
              "manifests": {}, "tables": {}, "sweeps": {}, "fixtures": {}}
    for fname in sorted(os.listdir(run)):
        path = os.path.join(run, fname)
        if fname.endswith("_manifest.json"):
            with open(path) as fh:
                report["manifests"][fname] = json.load(fh)
        elif fname.endswith("_table.csv"):
            report["tables"][fname] = _read_csv(path)
        elif fname.endswith("_sweep.csv"):
            report["sweeps"][fname] = _read_csv(path)
        elif fname.endswith("_fixtures.csv"):
            report["fixtures"][fname] = _read_csv(path)
    for kind in expected:
        key = {"table": "tables", "sweep": "sweeps", "fixtures": "fixtures",
               "manifest": "manifests"}.get(kind)
        if key is None:
            raise CliError(f"unknown --expect item {kind!r}", EXIT_CONFIG)
        if not report[key]:
            raise CliError(f"incomplete run: no {kind} outputs in {run}", EXIT_MISSING)

    import jsonschema

    schema = json.loads(
        resources.files("tomonet").joinpath("report_schema.json").read_text()
    )
    jsonschema.validate(report, schema)
    path = os.path.join(run, "report.json")
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tomonet", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--task", required=True, choices=sorted(TASKS))
        sp.add_argument("--out", required=True, help="run directory")

    g = sub.add_parser("generate", help="generate training datasets")
    common(g)
    g.add_argument("--sizes", required=True, help="comma-separated sample counts")
    g.add_argument("--mdata", default="full",
                   help='mask policy: "full", an integer, or "uniform:LO-HI"')
    g.add_argument("--noise-sigma", type=float, default=0.0)
    g.add_argument("--pure-fraction", type=float, default=0.5)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train networks on generated datasets")
    common(t)
    t.add_argument("--sizes", required=True)
    t.add_argument("--epochs", required=True, help="comma-separated epoch grid")
    t.add_argument("--batch-size", type=int, default=32)
    t.add_argument("--eta", type=float, default=0.5)
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_train)

    tb = sub.add_parser("table", help="average fidelity per (size, epochs) cell")
    common(tb)
    tb.add_argument("--sizes", required=True)
    tb.add_argument("--epochs", required=True)
    tb.add_argument("--mdata", required=True, type=int)
    tb.add_argument("--test-count", type=int, default=3000)
    tb.add_argument("--test-seed", type=int, default=1234)
    tb.add_argument("--min-fidelity", type=float, default=None)
    tb.set_defaults(func=cmd_table)

    sw = sub.add_parser("sweep", help="fidelity vs reduced dataset size")
    common(sw)
    sw.add_argument("--checkpoint", required=True)
    sw.add_argument("--mdata", required=True, help="comma-separated m_data values")
    sw.add_argument("--repeats", type=int, default=50)
    sw.add_argument("--test-count", type=int, default=200)
    sw.add_argument("--test-seed", type=int, default=1234)
    sw.set_defaults(func=cmd_sweep)

    fx = sub.add_parser("fixtures", help="per-fixture fidelity report")
    common(fx)
    fx.add_argument("--checkpoint", required=True)
    fx.add_argument("--mdata", default="", help="optional comma-separated m_data values")
    fx.add_argument("--repeats", type=int, default=50)
    fx.add_argument("--noise-sigma", type=float, default=0.01)
    fx.add_argument("--seed", type=int, default=4321)
    fx.add_argument("--min-fidelity", type=float, default=None)
    fx.set_defaults(func=cmd_fixtures)

    rp = sub.add_parser("report", help="aggregate a run directory into report.json")
    rp.add_argument("--out", required=True, help="run directory")
    rp.add_argument("--expect", default="",
                    help="comma-separated kinds that must be present "
                         "(table,sweep,fixtures,manifest)")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
