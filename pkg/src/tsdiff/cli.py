"""Command-line pipeline: generate data and queries, train, evaluate, serve.

Exit codes: 0 success, 2 usage error, 3 data error (missing/corrupt/mismatched
artifacts), 4 numeric failure (divergent training or non-finite math). Errors
print a single `error[kind]: ...` line on stderr.
"""

from __future__ import annotations

import functools
import json
import sys
from importlib import resources
from pathlib import Path

import click

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .datafiles import (
    MANIFEST_NAME,
    SAMPLES_NAME,
    load_dataset,
    load_queries,
    save_bindings,
    save_dataset,
    save_json,
    save_queries,
)
from .model import ARCHS, MERGES, EncoderConfig
from .perturb import generate_base_signals, generate_dataset
from .queries import bind_queries, grammar_capacity, paraphrase_pool, split_queries
from .retrieval import build_index, embed_text_batch, evaluate_map, format_report, load_index, save_index
from .retrieval import search as index_search
from .series import minmax_scale, read_series_csv, resample_linear
from .train import LOSS_MODES, TrainConfig, TrainingDivergence, restore_model
from .train import train as run_training
from .util import atomic_write_text, file_fingerprint, stream_rng

E_DATA = 3
E_NUMERIC = 4

QUERIES_ALL = "queries.tsv"
QUERIES_TRAIN = "queries-train.tsv"
QUERIES_TEST = "queries-test.tsv"
CHECKPOINT_NAME = "checkpoint.tsckpt"


def _fail(kind: str, message, code: int):
    line = " ".join(str(message).split())
    click.echo(f"error[{kind}]: {line}", err=True)
    sys.exit(code)


def guarded(fn):
    """Map exceptions to the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (click.ClickException, click.Abort, SystemExit):
            raise
        except (TrainingDivergence, FloatingPointError, ZeroDivisionError) as exc:
            _fail("numeric", exc, E_NUMERIC)
        except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
            _fail("data", exc, E_DATA)

    return wrapper


@click.group()
@click.version_option(__version__)
def main():
    """Retrieve time-series pairs whose difference matches a text query."""


def _load_profile(name: str, config_path: Path | None) -> dict:
    data = json.loads(resources.files("tsdiff").joinpath(f"profiles/{name}.json").read_text(encoding="utf-8"))
    if config_path is not None:
        override = json.loads(Path(config_path).read_text(encoding="utf-8"))
        for section, values in override.items():
            if isinstance(values, dict) and isinstance(data.get(section), dict):
                data[section].update(values)
            else:
                data[section] = values
    return data


@main.command("gen-data")
@click.option("--bases", default="synthetic", show_default=True, help="'synthetic' or a CSV file of base series.")
@click.option("--n-bases", default=64, show_default=True, type=int, help="Synthetic base pool size.")
@click.option("--train", "train_count", default=4000, show_default=True, type=int)
@click.option("--val", "val_count", default=240, show_default=True, type=int)
@click.option("--test", "test_count", default=400, show_default=True, type=int)
@click.option("--length", default=256, show_default=True, type=int, help="Samples per series after resampling.")
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=0, show_default=True, type=int)
@guarded
def gen_data(bases, n_bases, train_count, val_count, test_count, length, out, seed):
    """Generate a labeled reference/target pair dataset."""
    if min(train_count, val_count, test_count) < 0:
        raise click.UsageError("--train/--val/--test must be non-negative")
    if length < 2:
        raise click.UsageError("--length must be at least 2")
    if bases == "synthetic":
        if n_bases < 1:
            raise click.UsageError("--n-bases must be at least 1")
        base_list = generate_base_signals(n_bases, length, stream_rng(seed, "bases", 0))
    else:
        base_list = [minmax_scale(resample_linear(s, length)) for s in read_series_csv(bases)]
        if not base_list:
            raise ValueError(f"no series found in {bases}")
    counts = {"train": train_count, "val": val_count, "test": test_count}
    splits = generate_dataset(base_list, counts, seed)
    save_dataset(out, splits)
    save_json(
        Path(out) / "config.json",
        {
            "command": "gen-data",
            "version": __version__,
            "bases": bases,
            "n_bases": n_bases if bases == "synthetic" else len(base_list),
            "counts": counts,
            "length": length,
            "seed": seed,
        },
    )
    click.echo(f"wrote {sum(counts.values())} pairs to {out}")


@main.command("gen-queries")
@click.option("--per-label", default=1000, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--seed", default=0, show_default=True, type=int)
@guarded
def gen_queries(per_label, out, seed):
    """Generate the labeled query pool and its train/test split."""
    if per_label < 1:
        raise click.UsageError("--per-label must be at least 1")
    for label in range(1, 13):
        capacity = grammar_capacity(label)
        if per_label > capacity:
            raise click.UsageError(f"--per-label {per_label} exceeds grammar capacity {capacity} for label {label}")
    pool = []
    for label in range(1, 13):
        pool.extend(paraphrase_pool(label, per_label, stream_rng(seed, "queries", label)))
    train_q, test_q = split_queries(pool, stream_rng(seed, "query-split"))
    out = Path(out)
    save_queries(out / QUERIES_ALL, pool)
    save_queries(out / QUERIES_TRAIN, train_q)
    save_queries(out / QUERIES_TEST, test_q)
    save_json(
        out / "config.json",
        {"command": "gen-queries", "version": __version__, "per_label": per_label, "seed": seed},
    )
    click.echo(f"wrote {len(pool)} queries ({len(train_q)} train / {len(test_q)} test) to {out}")


@main.command("train")
@click.option("--dataset", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--queries", "queries_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--profile", default="desk", show_default=True, type=click.Choice(["desk", "paper"]))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False, path_type=Path), help="JSON overriding profile sections.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--loss-mode", default=None, type=click.Choice(list(LOSS_MODES)))
@click.option("--signal-arch", default=None, type=click.Choice(list(ARCHS)))
@click.option("--merge", "merge_method", default=None, type=click.Choice(list(MERGES)))
@click.option("--cross-attention/--no-cross-attention", "cross_attention", default=None)
@click.option("--freeze-text/--no-freeze-text", "freeze_text", default=None)
@click.option("--epochs", default=None, type=int)
@click.option("--batch-size", default=None, type=int)
@guarded
def train_cmd(dataset, queries_dir, out, profile, config_path, seed, loss_mode, signal_arch, merge_method, cross_attention, freeze_text, epochs, batch_size):
    """Train a dual-encoder model and save the best-validation checkpoint."""
    data = _load_profile(profile, config_path)
    enc_d = dict(data["encoder"])
    train_d = dict(data["train"])
    if signal_arch is not None:
        enc_d["signal_arch"] = signal_arch
    if merge_method is not None:
        enc_d["merge_method"] = merge_method
    if cross_attention is not None:
        enc_d["use_cross_attention"] = cross_attention
    if loss_mode is not None:
        train_d["loss_mode"] = loss_mode
    if freeze_text is not None:
        train_d["freeze_text_encoder"] = freeze_text
    if epochs is not None:
        train_d["epochs"] = epochs
    if batch_size is not None:
        train_d["batch_size"] = batch_size
    train_d["seed"] = seed
    enc_cfg = EncoderConfig.from_dict(enc_d)
    train_cfg = TrainConfig.from_dict(train_d)

    splits = load_dataset(dataset)
    if not splits["train"] or not splits["val"]:
        raise ValueError(f"{dataset}: training needs nonempty train and val splits")
    train_queries = load_queries(queries_dir / QUERIES_TRAIN)
    bound_train = bind_queries(splits["train"], train_queries, stream_rng(seed, "bind", 0), split="train")
    bound_val = bind_queries(splits["val"], train_queries, stream_rng(seed, "bind", 1), split="val")

    def show_epoch(m):
        click.echo(
            f"epoch {m.epoch}/{train_cfg.epochs}  train {m.train_loss:.4f}  val {m.val_loss:.4f}  {m.wall_time_s:.1f}s",
            err=True,
        )

    result = run_training(bound_train, bound_val, train_cfg, enc_cfg, on_epoch=show_epoch)
    ckpt = result.checkpoint
    fingerprints = {
        "manifest": file_fingerprint(dataset / MANIFEST_NAME),
        "samples": file_fingerprint(dataset / SAMPLES_NAME),
        "queries_train": file_fingerprint(queries_dir / QUERIES_TRAIN),
    }
    if (queries_dir / QUERIES_TEST).is_file():
        fingerprints["queries_test"] = file_fingerprint(queries_dir / QUERIES_TEST)
    ckpt.metadata = {"seed": seed, "fingerprints": fingerprints}

    out = Path(out)
    save_checkpoint(out / CHECKPOINT_NAME, ckpt)
    save_bindings(out / "bindings-train.tsv", bound_train)
    save_bindings(out / "bindings-val.tsv", bound_val)
    metrics_lines = [
        json.dumps(
            {"epoch": m.epoch, "train_loss": m.train_loss, "val_loss": m.val_loss, "wall_time_s": m.wall_time_s}
        )
        for m in result.metrics
    ]
    atomic_write_text(out / "metrics.jsonl", "\n".join(metrics_lines) + "\n")
    save_json(
        out / "config.json",
        {
            "command": "train",
            "version": __version__,
            "profile": profile,
            "seed": seed,
            "encoder": enc_cfg.to_dict(),
            "train": train_cfg.to_dict(),
        },
    )
    click.echo(f"best epoch {ckpt.epoch}, val loss {ckpt.val_loss:.4f} -> {out / CHECKPOINT_NAME}")


def _config_desc(ckpt) -> str:
    enc = ckpt.encoder_config
    xattn = "xattn" if enc.use_cross_attention else "noxattn"
    return f"{enc.signal_arch}-{enc.merge_method}-{xattn}-{ckpt.train_config.loss_mode}"


def _verify_fingerprints(ckpt, dataset: Path, queries_dir: Path) -> None:
    stored = ckpt.metadata.get("fingerprints", {})
    current = {
        "manifest": file_fingerprint(dataset / MANIFEST_NAME),
        "samples": file_fingerprint(dataset / SAMPLES_NAME),
        "queries_test": file_fingerprint(queries_dir / QUERIES_TEST),
    }
    for key, now in current.items():
        then = stored.get(key)
        if then is not None and then != now:
            raise ValueError(
                f"fingerprint mismatch for {key}: checkpoint was trained against different artifacts "
                f"({then[:12]}... vs {now[:12]}...)"
            )


@main.command("eval")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--dataset", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--queries", "queries_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--report", "report_path", required=True, type=click.Path(path_type=Path))
@click.option("--verify-fingerprints/--no-verify-fingerprints", default=True, show_default=True)
@guarded
def eval_cmd(checkpoint_path, dataset, queries_dir, report_path, verify_fingerprints):
    """Score the checkpoint on the test split: per-relationship mAP and Total."""
    ckpt = load_checkpoint(checkpoint_path)
    if verify_fingerprints:
        _verify_fingerprints(ckpt, dataset, queries_dir)
    model = restore_model(ckpt)
    splits = load_dataset(dataset)
    if not splits["test"]:
        raise ValueError(f"{dataset}: no test split to evaluate")
    test_queries = load_queries(queries_dir / QUERIES_TEST)
    report = evaluate_map(model, test_queries, splits["test"])
    atomic_write_text(report_path, format_report([(_config_desc(ckpt), report)]))
    click.echo(f"overall mAP {report.overall:.4f} ({len(test_queries)} queries x {len(splits['test'])} pairs)")


@main.command("index")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--dataset", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--split", default="test", show_default=True, type=click.Choice(["train", "val", "test"]))
@guarded
def index_cmd(checkpoint_path, dataset, out, split):
    """Embed one split's pairs into a searchable index file."""
    ckpt = load_checkpoint(checkpoint_path)
    model = restore_model(ckpt)
    pairs = load_dataset(dataset)[split]
    if not pairs:
        raise ValueError(f"{dataset}: split {split!r} is empty")
    index = build_index(model, pairs, model_fingerprint=file_fingerprint(checkpoint_path))
    save_index(out, index)
    click.echo(f"indexed {len(index)} pairs -> {out}")


@main.command("search")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--query", required=True)
@click.option("--k", default=10, show_default=True, type=int)
@guarded
def search_cmd(checkpoint_path, index_path, query, k):
    """Rank indexed pairs against a natural-language query."""
    if not query.strip():
        raise click.UsageError("--query must be non-empty")
    ckpt = load_checkpoint(checkpoint_path)
    model = restore_model(ckpt)
    index = load_index(index_path)
    fingerprint = file_fingerprint(checkpoint_path)
    if index.model_fingerprint and index.model_fingerprint != fingerprint:
        raise ValueError("index was built from a different checkpoint")
    if not 1 <= k <= len(index):
        raise click.UsageError(f"--k must be in 1..{len(index)}")
    q_vec = embed_text_batch(model, [query])[0]
    ranked = index_search(index, q_vec, k)
    label_of_pair = dict(zip(index.pair_ids, index.labels))
    click.echo("rank\tpair_id\tscore\tlabel")
    for rank, (pair_id, score) in enumerate(ranked.items, start=1):
        click.echo(f"{rank}\t{pair_id}\t{score:.6f}\t{label_of_pair[pair_id]}")


@main.command("serve")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--index", "index_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--dataset", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True, type=int)
@guarded
def serve_cmd(checkpoint_path, index_path, dataset, host, port):
    """Serve the retrieval API over a checkpoint, index, and dataset."""
    import uvicorn

    from .service import create_app, load_state

    state = load_state(checkpoint_path, index_path, dataset)
    click.echo(f"serving {len(state.index)} pairs on {host}:{port}")
    uvicorn.run(create_app(state), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
