"""Command-line interface for uapoint."""

import csv
import io
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
import torch
from click.core import ParameterSource
from pydantic import ValidationError

from .alignment import sinkhorn
from .common.config import (
    EvalSettings,
    ModelSettings,
    ProjectionSettings,
    TrainConfig,
    build,
    load_config_file,
)
from .common.errors import DatasetError, EmptyInputError, ParameterError, ParseError, UapointError
from .common.logging import configure_logging, get_logger, log_run_parameters
from .common.models import Domain, Manifest, ManifestEntry, OcclusionPlane, ShiftSpec
from .eval import ablation_view_strategies, encode_domain, export_pca, gap_report
from .model import cloud_prompts, get_knowledge_source, load_checkpoint
from .model.state import ModelState
from .pointcloud import PointSet, generate_benchmark, get_shapes, load_dataset, save_pointset, write_manifest
from .projection import camera_rig, corrupt_views, project_all, render_dataset
from .selection import predict_cloud
from .training import evaluate_state, train as run_training

logger = get_logger(__name__)

# click parameter name -> settings field, per settings section
TRAIN_FLAGS = {
    "shots": "shots_per_class",
    "epochs": "epochs",
    "batch_size": "batch_size",
    "lr": "lr",
    "momentum": "momentum",
    "weight_decay": "weight_decay",
    "alpha": "alpha",
    "rho": "rho",
    "epsilon_ot": "epsilon_ot",
    "variant": "variant",
    "seed": "seed",
    "m_views": "m_views",
    "ortho": "use_ortho",
    "proto": "use_proto",
    "ot": "use_ot",
    "conf": "use_conf",
    "threads": "threads",
}
MODEL_FLAGS = {
    "embed_dim": "embed_dim",
    "lora_rank": "lora_rank",
    "image_size": "image_size",
    "prompt_mode": "prompt_mode",
    "init_seed": "init_seed",
}
PROJECTION_FLAGS = {"m_views": "m_views", "distance": "distance", "fov": "fov_degrees", "image_size": "image_size"}
EVAL_FLAGS = {"beta": "beta", "epsilon": "epsilon", "bandwidth": "bandwidth", "seed": "seed"}


def _given(ctx: click.Context, name: str) -> bool:
    return ctx.get_parameter_source(name) == ParameterSource.COMMANDLINE


def _resolve(ctx: click.Context, section: Dict[str, Any], flags: Dict[str, str], params: Dict[str, Any]) -> Dict[str, Any]:
    """Config-file values overridden by the flags actually typed on the command line."""
    values = dict(section)
    for param, field in flags.items():
        if param in params and _given(ctx, param):
            values[field] = params[param]
    return values


def _load_sections(config: Optional[str]) -> Dict[str, Dict[str, Any]]:
    if config is None:
        return {"train": {}, "model": {}, "projection": {}, "eval": {}}
    return load_config_file(config)


def _write_run_record(out: Path, command: str, **parameters: Any) -> None:
    """Write ``run.json``: the fully resolved configuration of one command."""
    out.mkdir(parents=True, exist_ok=True)
    record = log_run_parameters(command, **parameters)
    (out / "run.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.debug("Run parameters", **record)


def _parse_floats(text: str, count: int, name: str) -> Tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ParameterError(f"{name} must be {count} comma-separated numbers, got {text!r}") from None
    if len(values) != count:
        raise ParameterError(f"{name} must be {count} comma-separated numbers, got {text!r}")
    return values


def _build_shift(
    rotation_axis: str, rotation_angle: float, jitter: float, dropout: float, occlude: Optional[str]
) -> ShiftSpec:
    occlusion = None
    if occlude:
        nx, ny, nz, offset = _parse_floats(occlude, 4, "--occlude")
        occlusion = {"normal": (nx, ny, nz), "offset": offset}
    try:
        return ShiftSpec(
            rotation_axis=_parse_floats(rotation_axis, 3, "--rotation-axis"),  # type: ignore[arg-type]
            rotation_angle=rotation_angle,
            jitter_sigma=jitter,
            dropout_ratio=dropout,
            occlusion=OcclusionPlane(**occlusion) if occlusion else None,
        )
    except ValidationError as e:
        raise ParameterError(str(e)) from e


def _read_rows(path: str) -> List[np.ndarray]:
    """Read the non-blank rows of a numeric CSV file."""
    if not Path(path).exists():
        raise DatasetError(f"file not found: {path}")
    rows: List[List[float]] = []
    with Path(path).open(newline="", encoding="utf-8") as f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise ParseError(f"non-numeric value in {path}", line=lineno) from None
    if not rows:
        raise EmptyInputError(f"{path} contains no rows")
    return [np.array(row, dtype=np.float64) for row in rows]


def _read_matrix(path: str) -> np.ndarray:
    """Read a rectangular numeric CSV file into a 2-D array."""
    rows = _read_rows(path)
    if any(len(row) != len(rows[0]) for row in rows):
        raise ParseError(f"{path} has rows of different lengths")
    return np.stack(rows)


def _render(
    clouds: Sequence[PointSet], projection: ProjectionSettings, threads: int, corrupt: float = 0.0, seed: int = 0
) -> np.ndarray:
    cams = camera_rig(projection.m_views, projection.distance, projection.fov_degrees, projection.image_size)
    if corrupt == 0.0:
        return render_dataset(clouds, cams, threads)
    return np.stack(
        [corrupt_views(project_all(ps, cams), corrupt, seed, index=i).as_array() for i, ps in enumerate(clouds)]
    )


def _hidden_labels(target: Sequence[PointSet]) -> Optional[List[int]]:
    """Reveal target labels for evaluation; None when any label is unknown."""
    if not all(ps.has_hidden_label for ps in target):
        return None
    return [ps.reveal_label() for ps in target]


def _source_labels(source: Sequence[PointSet]) -> List[int]:
    if any(ps.label is None for ps in source):
        raise DatasetError("every source sample needs a label")
    return [int(ps.label) for ps in source]  # type: ignore[arg-type]


def _projection_for(state: ModelState, ctx: click.Context, sections: Dict[str, Dict[str, Any]], **params: Any) -> ProjectionSettings:
    values = _resolve(ctx, sections["projection"], PROJECTION_FLAGS, params)
    values["image_size"] = state.cfg.image_size
    return build(ProjectionSettings, values)


def _dump(path: Path, payload: Dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def output_option(f: Callable[..., Any]) -> Callable[..., Any]:
    return click.option(
        "--output", "-o", default="uapoint-out", show_default=True, type=click.Path(file_okay=False), help="Output directory"
    )(f)


def config_option(f: Callable[..., Any]) -> Callable[..., Any]:
    return click.option("--config", "-c", type=click.Path(dir_okay=False), help="TOML configuration file")(f)


def projection_options(f: Callable[..., Any]) -> Callable[..., Any]:
    for option in reversed(
        [
            click.option("--m-views", default=10, show_default=True, type=int, help="Projected views per cloud"),
            click.option("--distance", default=2.0, show_default=True, type=float, help="Camera distance from origin"),
            click.option("--fov", default=60.0, show_default=True, type=float, help="Vertical field of view (degrees)"),
            click.option("--threads", default=1, show_default=True, type=int, help="Worker threads"),
        ]
    ):
        f = option(f)
    return f


def shift_options(f: Callable[..., Any]) -> Callable[..., Any]:
    for option in reversed(
        [
            click.option("--rotation-axis", default="0,0,1", show_default=True, help="Rotation axis x,y,z"),
            click.option("--rotation-angle", default=0.0, show_default=True, type=float, help="Rotation angle (radians)"),
            click.option("--jitter", default=0.0, show_default=True, type=float, help="Gaussian jitter sigma"),
            click.option("--dropout", default=0.0, show_default=True, type=float, help="Fraction of points dropped"),
            click.option("--occlude", default=None, help="Occlusion plane nx,ny,nz,offset"),
        ]
    ):
        f = option(f)
    return f


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging")
@click.option("--log-format", type=click.Choice(["text", "json"]), default=None, help="Log line format")
def cli(verbose: bool, log_format: Optional[str]) -> None:
    """uapoint: uncertainty-aware few-shot domain adaptation for point clouds via multi-view depth maps."""
    configure_logging(level="DEBUG" if verbose else None, fmt=log_format)


@cli.command()
@click.option("--classes", default=5, show_default=True, type=int, help="Number of classes (2..10)")
@click.option(
    "--samples-per-class", "--shots", "samples_per_class", default=32, show_default=True, type=int,
    help="Samples per class and domain",
)
@click.option("--points", default=512, show_default=True, type=int, help="Points per sample")
@click.option("--seed", default=0, show_default=True, type=int, help="Generator seed")
@click.option("--threads", default=1, show_default=True, type=int, help="Worker threads")
@shift_options
@output_option
def synth(
    classes: int,
    samples_per_class: int,
    points: int,
    seed: int,
    threads: int,
    rotation_axis: str,
    rotation_angle: float,
    jitter: float,
    dropout: float,
    occlude: Optional[str],
    output: str,
) -> None:
    """Generate the synthetic source/target benchmark."""
    shift = _build_shift(rotation_axis, rotation_angle, jitter, dropout, occlude)
    out = Path(output)
    _write_run_record(
        out, "synth", classes=classes, samples_per_class=samples_per_class, points=points, seed=seed,
        shift=shift.model_dump(),
    )
    source, target = generate_benchmark(classes, samples_per_class, points, shift, seed, threads)

    entries: List[ManifestEntry] = []
    for domain, samples in ((Domain.SOURCE, source), (Domain.TARGET, target)):
        folder = out / domain.value
        folder.mkdir(parents=True, exist_ok=True)
        for i, ps in enumerate(samples):
            rel = f"{domain.value}/{i:05d}.xyz"
            save_pointset(ps, out / rel)
            if domain == Domain.SOURCE:
                entries.append(ManifestEntry(path=rel, domain=domain, label=ps.label))
            else:
                entries.append(ManifestEntry(path=rel, domain=domain, hidden_label=ps.reveal_label()))

    manifest = Manifest(
        classes=[shape.name for shape in get_shapes(classes)],
        seed=seed,
        points_per_sample=points,
        shift=shift,
        samples=entries,
    )
    write_manifest(manifest, out / "manifest.json")
    logger.info("Benchmark written", output=str(out), source=len(source), target=len(target))
    click.echo(str(out / "manifest.json"))


@cli.command()
@click.option("--manifest", required=True, type=click.Path(dir_okay=False), help="Dataset manifest")
@click.option("--image-size", default=32, show_default=True, type=int, help="Depth map size")
@click.option(
    "--domain", "domains", type=click.Choice(["source", "target", "both"]), default="both", show_default=True,
    help="Which domain to export",
)
@projection_options
@output_option
@config_option
@click.pass_context
def project(
    ctx: click.Context,
    manifest: str,
    image_size: int,
    domains: str,
    m_views: int,
    distance: float,
    fov: float,
    threads: int,
    output: str,
    config: Optional[str],
) -> None:
    """Render every sample to depth maps and export them as PGM files."""
    sections = _load_sections(config)
    projection = build(
        ProjectionSettings,
        _resolve(ctx, sections["projection"], PROJECTION_FLAGS, dict(m_views=m_views, distance=distance, fov=fov, image_size=image_size)),
    )
    out = Path(output)
    _write_run_record(out, "project", manifest=manifest, domain=domains, projection=projection.model_dump())
    _, source, target = load_dataset(manifest)
    cams = camera_rig(projection.m_views, projection.distance, projection.fov_degrees, projection.image_size)

    selected = {"source": source, "target": target} if domains == "both" else {domains: source if domains == "source" else target}
    written = 0
    for name, clouds in selected.items():
        folder = out / "views" / name
        folder.mkdir(parents=True, exist_ok=True)
        for i, ps in enumerate(clouds):
            for v, depth in enumerate(project_all(ps, cams, threads).views):
                depth.to_pgm(folder / f"{i:05d}_{v:02d}.pgm")
                written += 1
    logger.info("Depth maps written", output=str(out / "views"), files=written)


@cli.command()
@click.option("--manifest", required=True, type=click.Path(dir_okay=False), help="Dataset manifest")
@click.option("--shots", default=16, show_default=True, type=int, help="Labeled source samples per class")
@click.option("--epochs", default=20, show_default=True, type=int, help="Training epochs")
@click.option("--batch-size", default=16, show_default=True, type=int, help="Clouds per domain per step")
@click.option("--lr", default=0.002, show_default=True, type=float, help="Learning rate")
@click.option("--momentum", default=0.9, show_default=True, type=float, help="SGD momentum")
@click.option("--weight-decay", default=1e-5, show_default=True, type=float, help="L2 weight decay")
@click.option("--alpha", default=1.0, show_default=True, type=float, help="Weight of the auxiliary losses")
@click.option("--rho", default=0.5, show_default=True, type=float, help="View-selection percentile")
@click.option("--epsilon-ot", default=0.05, show_default=True, type=float, help="Sinkhorn regularisation of L_OT")
@click.option("--variant", type=click.Choice(["T", "V", "B"], case_sensitive=False), default="B", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int, help="Sampling and shuffling seed")
@click.option("--ortho/--no-ortho", default=True, show_default=True, help="Include the orthogonality loss")
@click.option("--proto/--no-proto", default=True, show_default=True, help="Include the prototype loss")
@click.option("--ot/--no-ot", default=True, show_default=True, help="Include the transport loss")
@click.option("--conf/--no-conf", default=True, show_default=True, help="Include the confidence loss")
@click.option("--embed-dim", default=64, show_default=True, type=int, help="Embedding dimension")
@click.option("--lora-rank", default=4, show_default=True, type=int, help="Adapter rank")
@click.option("--image-size", default=32, show_default=True, type=int, help="Depth map size")
@click.option(
    "--prompt-mode", type=click.Choice(["full", "text", "visual", "none"]), default="full", show_default=True,
    help="Active prompts",
)
@click.option("--init-seed", default=0, show_default=True, type=int, help="Parameter initialisation seed")
@click.option("--knowledge", type=click.Path(dir_okay=False), default=None, help="EMB1 knowledge file")
@projection_options
@output_option
@config_option
@click.pass_context
def train(ctx: click.Context, manifest: str, knowledge: Optional[str], output: str, config: Optional[str], **params: Any) -> None:
    """Train on a few-shot source subset and the unlabeled target domain."""
    sections = _load_sections(config)
    train_cfg: TrainConfig = build(TrainConfig, _resolve(ctx, sections["train"], TRAIN_FLAGS, params))
    model_cfg: ModelSettings = build(ModelSettings, _resolve(ctx, sections["model"], MODEL_FLAGS, params))
    projection_values = _resolve(ctx, sections["projection"], PROJECTION_FLAGS, params)
    projection_values["m_views"] = train_cfg.m_views
    projection_values["image_size"] = model_cfg.image_size
    projection: ProjectionSettings = build(ProjectionSettings, projection_values)
    eval_cfg: EvalSettings = build(EvalSettings, sections["eval"])

    out = Path(output)
    _write_run_record(
        out,
        "train",
        manifest=manifest,
        knowledge=knowledge,
        seed=train_cfg.seed,
        train=train_cfg.model_dump(),
        model=model_cfg.model_dump(),
        projection=projection.model_dump(),
        eval=eval_cfg.model_dump(),
    )

    data, source, target = load_dataset(manifest)
    matrix = get_knowledge_source(knowledge, model_cfg.embed_dim).load(data.classes)
    checkpoint = out / "model.ckpt"
    _, report = run_training(
        source, target, train_cfg, data.classes, model_cfg, projection, eval_cfg, matrix, checkpoint
    )

    with (out / "report.jsonl").open("w", encoding="utf-8", newline="\n") as f:
        for record in report.epochs:
            f.write(record.model_dump_json() + "\n")
    _dump(out / "summary.json", report.model_dump(exclude={"epochs"}) | {"final": report.epochs[-1].model_dump()})
    logger.info(
        "Training finished",
        checkpoint=str(checkpoint),
        source_acc=report.epochs[-1].source_accuracy,
        target_acc=report.epochs[-1].target_accuracy,
        target_label_reads=report.target_label_reads,
    )


@cli.command(name="eval")
@click.option("--manifest", required=True, type=click.Path(dir_okay=False), help="Dataset manifest")
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False), help="CKPT1 checkpoint")
@click.option("--rho", default=0.5, show_default=True, type=float, help="View-selection percentile")
@click.option("--beta", default=1.0, show_default=True, type=float, help="Weight of the prototype term")
@click.option("--epsilon", default=0.05, show_default=True, type=float, help="Sinkhorn regularisation of W_eps")
@click.option("--bandwidth", default=None, type=float, help="MMD bandwidth (default: median heuristic)")
@click.option("--seed", default=0, show_default=True, type=int, help="Seed of sampling and corruption")
@click.option("--ablation", type=click.Choice(["views"]), default=None, help="Write the view-strategy ablation CSV")
@click.option("--export-pca", "pca_path", type=click.Path(dir_okay=False), default=None, help="Write 2-D PCA coordinates CSV")
@click.option("--corrupt-views", "corrupt_fraction", default=0.0, show_default=True, type=float, help="Fraction of target views blanked")
@projection_options
@output_option
@config_option
@click.pass_context
def evaluate(
    ctx: click.Context,
    manifest: str,
    checkpoint: str,
    rho: float,
    ablation: Optional[str],
    pca_path: Optional[str],
    corrupt_fraction: float,
    threads: int,
    output: str,
    config: Optional[str],
    **params: Any,
) -> None:
    """Accuracies, MMD, Fréchet distance and the bound of a trained model."""
    sections = _load_sections(config)
    eval_cfg: EvalSettings = build(EvalSettings, _resolve(ctx, sections["eval"], EVAL_FLAGS, params))
    state, variant = load_checkpoint(checkpoint)
    projection = _projection_for(state, ctx, sections, **params)
    out = Path(output)
    _write_run_record(
        out, "eval", manifest=manifest, checkpoint=checkpoint, variant=variant, rho=rho, ablation=ablation,
        corrupt_views=corrupt_fraction, projection=projection.model_dump(), eval=eval_cfg.model_dump(),
    )

    _, source, target = load_dataset(manifest)
    source_labels = _source_labels(source)
    target_labels = _hidden_labels(target)
    source_pixels = _render(source, projection, threads)
    target_pixels = _render(target, projection, threads, corrupt_fraction, eval_cfg.seed)

    snapshot = evaluate_state(
        state, source, source_pixels, source_labels, target, target_pixels, target_labels, rho, eval_cfg
    )
    _dump(out / "gap_report.json", snapshot.gap.model_dump())
    _dump(out / "eval.json", snapshot.model_dump())
    click.echo(snapshot.model_dump_json())

    if ablation or pca_path:
        encoded_target = encode_domain(state, target, target_pixels, rho)
        if ablation == "views":
            if target_labels is None:
                raise DatasetError("the view ablation needs hidden target labels in the manifest")
            scores = ablation_view_strategies(encoded_target, target_labels, eval_cfg.seed)
            with (out / "ablation_views.csv").open("w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(["strategy", "accuracy"])
                for name, acc in scores.items():
                    writer.writerow([name, repr(acc)])
            logger.info("View ablation written", **scores)
        if pca_path:
            encoded_source = encode_domain(state, source, source_pixels, rho)
            labels: Sequence[Optional[int]] = target_labels if target_labels is not None else [None] * len(target)
            export_pca(pca_path, encoded_source.embeddings, source_labels, encoded_target.embeddings, labels)
            logger.info("PCA coordinates written", path=pca_path)


@cli.command()
@click.option("--manifest", required=True, type=click.Path(dir_okay=False), help="Dataset manifest")
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False), help="CKPT1 checkpoint")
@click.option("--rho", default=0.5, show_default=True, type=float, help="View-selection percentile")
@click.option("--beta", default=1.0, show_default=True, type=float, help="Weight of the prototype term")
@click.option("--epsilon", default=0.05, show_default=True, type=float, help="Sinkhorn regularisation of W_eps")
@click.option("--seed", default=0, show_default=True, type=int, help="Seed of the OT subsample")
@projection_options
@output_option
@config_option
@click.pass_context
def bound(
    ctx: click.Context, manifest: str, checkpoint: str, rho: float, threads: int, output: str, config: Optional[str], **params: Any
) -> None:
    """Surrogate target-risk bound from labeled source and unlabeled target."""
    sections = _load_sections(config)
    eval_cfg: EvalSettings = build(EvalSettings, _resolve(ctx, sections["eval"], EVAL_FLAGS, params))
    state, variant = load_checkpoint(checkpoint)
    projection = _projection_for(state, ctx, sections, **params)
    out = Path(output)
    _write_run_record(
        out, "bound", manifest=manifest, checkpoint=checkpoint, variant=variant, rho=rho,
        projection=projection.model_dump(), eval=eval_cfg.model_dump(),
    )

    _, source, target = load_dataset(manifest)
    source_labels = _source_labels(source)
    encoded_source = encode_domain(state, source, _render(source, projection, threads), rho)
    encoded_target = encode_domain(state, target, _render(target, projection, threads), rho)
    report = gap_report(encoded_source, source_labels, encoded_target, state.num_classes, eval_cfg)
    _dump(out / "bound.json", report.model_dump())
    click.echo(report.model_dump_json())


@cli.command(name="sinkhorn")
@click.option("--cost", "cost_path", required=True, type=click.Path(dir_okay=False), help="Cost matrix CSV")
@click.option("--epsilon", default=0.05, show_default=True, type=float, help="Entropic regularisation")
@click.option("--tol", default=1e-6, show_default=True, type=float, help="Marginal tolerance")
@click.option("--max-iter", default=1000, show_default=True, type=int, help="Sweep cap")
@click.option("--marginals", type=click.Path(dir_okay=False), default=None, help="CSV with rows a and b")
@output_option
def sinkhorn_command(
    cost_path: str, epsilon: float, tol: float, max_iter: int, marginals: Optional[str], output: str
) -> None:
    """Solve one entropic transport problem: plan CSV, then objectives as a JSON line."""
    _write_run_record(
        Path(output), "sinkhorn", cost=cost_path, epsilon=epsilon, tol=tol, max_iter=max_iter, marginals=marginals
    )
    cost = _read_matrix(cost_path)
    a: Optional[torch.Tensor] = None
    b: Optional[torch.Tensor] = None
    if marginals:
        rows = _read_rows(marginals)
        if len(rows) != 2:
            raise ParseError(f"{marginals} must hold two rows: a then b")
        a = torch.from_numpy(rows[0])
        b = torch.from_numpy(rows[-1])

    plan = sinkhorn(torch.from_numpy(cost), epsilon, a, b, tol=tol, max_iter=max_iter)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in plan.plan.tolist():
        writer.writerow([repr(float(v)) for v in row])
    click.echo(buffer.getvalue(), nl=False)
    click.echo(
        json.dumps(
            {
                "cost": plan.cost,
                "entropy": plan.entropy,
                "entropic_objective": plan.entropic_objective,
                "epsilon": plan.epsilon,
                "iterations": plan.iterations,
                "converged": plan.converged,
                "marginal_violation": plan.marginal_violation(),
            },
            sort_keys=True,
        )
    )


@cli.command()
@click.option("--manifest", required=True, type=click.Path(dir_okay=False), help="Dataset manifest")
@click.option("--checkpoint", required=True, type=click.Path(dir_okay=False), help="CKPT1 checkpoint")
@click.option("--domain", type=click.Choice(["source", "target"]), default="target", show_default=True)
@click.option("--index", default=0, show_default=True, type=int, help="Sample index within the domain")
@click.option("--rho", default=0.5, show_default=True, type=float, help="View-selection percentile")
@projection_options
@output_option
@config_option
@click.pass_context
def inspect(
    ctx: click.Context,
    manifest: str,
    checkpoint: str,
    domain: str,
    index: int,
    rho: float,
    threads: int,
    output: str,
    config: Optional[str],
    **params: Any,
) -> None:
    """Print the per-view entropies and the selection of one sample as CSV."""
    sections = _load_sections(config)
    state, variant = load_checkpoint(checkpoint)
    projection = _projection_for(state, ctx, sections, **params)
    _write_run_record(
        Path(output), "inspect", manifest=manifest, checkpoint=checkpoint, domain=domain, index=index, rho=rho,
        projection=projection.model_dump(),
    )
    _, source, target = load_dataset(manifest)
    clouds = source if domain == "source" else target
    if not 0 <= index < len(clouds):
        raise ParameterError(f"index {index} outside [0, {len(clouds)})")

    cams = camera_rig(projection.m_views, projection.distance, projection.fov_degrees, projection.image_size)
    views = project_all(clouds[index], cams, threads)
    with torch.no_grad():
        _, prompts = cloud_prompts(state, [clouds[index]])
        prediction = predict_cloud(views, state, None if prompts is None else prompts[0], rho)

    selected = set(prediction.selected)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["view", "entropy", "selected", "predicted_class"])
    for v, (entropy, probs) in enumerate(zip(prediction.per_view_entropy.tolist(), prediction.per_view_probs)):
        writer.writerow([v, repr(float(entropy)), int(v in selected), int(np.argmax(probs.numpy()))])
    click.echo(buffer.getvalue(), nl=False)
    logger.info("Inspected sample", domain=domain, index=index, prediction=prediction.prediction)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the CLI and map failures to exit codes.

    Returns:
        0 on success, 1 on usage or parameter errors, 2 on data errors, 3 on numeric errors
    """
    try:
        code = cli.main(args=list(argv) if argv is not None else None, prog_name="uapoint", standalone_mode=False)
    except click.exceptions.Abort:
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except UapointError as e:
        logger.error("Command failed", error=str(e), kind=type(e).__name__)
        return e.exit_code
    return code if isinstance(code, int) else 0


def main() -> None:
    """Console-script entry point."""
    sys.exit(run())

