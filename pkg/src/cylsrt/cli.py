"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O
error.  Every non-zero exit prints a one-line ``error: ...`` cause; every
summary prints the seed in effect.
"""

import functools
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .bench import nnz_exponent, run_bench, time_exponent
from .codec import (read_image, read_matrix, read_sinogram, write_image,
                    write_matrix, write_sinogram)
from .errors import CodecError, NumericalError, ValidationError
from .geometry import load_config
from .operator import ApertureOperator, build_aperture_operator
from .report import (bench_figure, residual_figure, slice_figure,
                     write_metrics, write_table)
from .solver import cgls
from .verify import run_verification

EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

ZL_FILENAME = "zl_shared.crt"


def _xy_filename(c: int) -> str:
    return f"xy_{c:04d}.crt"


def _guard(fn):
    """Map domain errors to exit codes with a one-line cause."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}")
            sys.exit(EXIT_VALIDATION)
        except NumericalError as exc:
            click.echo(f"error: {exc}")
            sys.exit(EXIT_NUMERICAL)
        except (CodecError, OSError) as exc:
            click.echo(f"error: {exc}")
            sys.exit(EXIT_IO)

    return wrapper


def _common_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(), help="YAML configuration file.")(fn)
    fn = click.option("--seed", default=0, show_default=True,
                      help="Seed for all randomness in this command.")(fn)
    fn = click.option("--threads", default=None, type=int,
                      help="Worker threads [default: available parallelism].")(fn)
    fn = click.option("--metrics-out", "metrics_path", default=None,
                      type=click.Path(),
                      help="Also write machine-readable key = value metrics.")(fn)
    return fn


def _resolve_threads(threads):
    if threads is None:
        return os.cpu_count() or 1
    if threads < 1:
        raise ValidationError(f"--threads must be >= 1, got {threads}")
    return threads


def _emit_metrics(metrics_path, metrics):
    if metrics_path is not None:
        write_metrics(metrics_path, metrics)


def _load_cached_operator(config_path, matrices_dir, threads) -> ApertureOperator:
    grid, geometry, _ = load_config(config_path)
    matrices_dir = Path(matrices_dir)
    zl_path = matrices_dir / ZL_FILENAME
    if not zl_path.exists():
        raise CodecError(f"matrix cache {zl_path} not found; run 'cylsrt build' first")
    a34 = read_matrix(zl_path)
    a12_list = []
    for c in range(geometry.n_columns):
        path = matrices_dir / _xy_filename(c)
        if not path.exists():
            raise CodecError(f"matrix cache {path} not found; run 'cylsrt build' first")
        a12_list.append(read_matrix(path))
    op = ApertureOperator(tuple(a12_list), a34, grid, geometry, threads)
    click.echo(f"loaded {len(a12_list) + 1} cached matrices from {matrices_dir}")
    return op


@click.group()
@click.version_option(__version__, prog_name="cylsrt")
def main():
    """Spherical-shell transform for cylindrical sensor apertures."""


@main.command()
@_common_options
@click.option("--out-dir", required=True, type=click.Path(),
              help="Directory for the matrix cache files.")
@_guard
def build(config_path, seed, threads, metrics_path, out_dir):
    """Build and cache all transform matrices for a configuration."""
    threads = _resolve_threads(threads)
    grid, geometry, sampling = load_config(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    op = build_aperture_operator(grid, geometry, sampling, threads)
    build_seconds = time.perf_counter() - t0

    total_bytes = write_matrix(out / ZL_FILENAME, op.a34)
    for c, a12 in enumerate(op.a12_list):
        total_bytes += write_matrix(out / _xy_filename(c), a12)

    nnz_xy = sum(a.nnz for a in op.a12_list)
    click.echo(f"seed = {seed}")
    click.echo(f"built {geometry.n_columns} xy matrices (nnz = {nnz_xy}) and "
               f"1 shared zl matrix (nnz = {op.a34.nnz}) in {build_seconds:.3f} s")
    click.echo(f"wrote {total_bytes} bytes to {out}")
    _emit_metrics(metrics_path, {
        "seed": seed, "n_columns": geometry.n_columns, "nnz_xy": nnz_xy,
        "nnz_zl": op.a34.nnz, "build_seconds": build_seconds,
        "bytes_written": total_bytes,
    })


@main.command()
@_common_options
@click.option("--matrices-dir", required=True, type=click.Path(),
              help="Matrix cache directory produced by 'cylsrt build'.")
@click.option("--image", "image_path", required=True, type=click.Path(),
              help="Input image file (array codec).")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output sinogram file (array codec).")
@_guard
def forward(config_path, seed, threads, metrics_path, matrices_dir, image_path,
            out_path):
    """Apply the forward transform to an image using cached matrices."""
    threads = _resolve_threads(threads)
    op = _load_cached_operator(config_path, matrices_dir, threads)
    image = read_image(image_path, op.grid)
    t0 = time.perf_counter()
    sinogram = op.forward(image)
    forward_seconds = time.perf_counter() - t0
    write_sinogram(out_path, sinogram)
    click.echo(f"seed = {seed}")
    click.echo(f"forward transform of {op.grid.n_voxels} voxels -> "
               f"{op.geometry.n_measurements} measurements in {forward_seconds:.3f} s")
    click.echo(f"wrote {out_path}")
    _emit_metrics(metrics_path, {
        "seed": seed, "forward_seconds": forward_seconds,
        "sinogram_norm": float(np.linalg.norm(sinogram.values)),
    })


@main.command()
@_common_options
@click.option("--matrices-dir", required=True, type=click.Path(),
              help="Matrix cache directory produced by 'cylsrt build'.")
@click.option("--sinogram", "sinogram_path", required=True, type=click.Path(),
              help="Input sinogram file (array codec).")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output image file (array codec).")
@_guard
def adjoint(config_path, seed, threads, metrics_path, matrices_dir,
            sinogram_path, out_path):
    """Apply the matched adjoint to a sinogram using cached matrices."""
    threads = _resolve_threads(threads)
    op = _load_cached_operator(config_path, matrices_dir, threads)
    sinogram = read_sinogram(sinogram_path, op.geometry)
    t0 = time.perf_counter()
    image = op.adjoint(sinogram)
    adjoint_seconds = time.perf_counter() - t0
    write_image(out_path, image)
    click.echo(f"seed = {seed}")
    click.echo(f"adjoint transform of {op.geometry.n_measurements} measurements -> "
               f"{op.grid.n_voxels} voxels in {adjoint_seconds:.3f} s")
    click.echo(f"wrote {out_path}")
    _emit_metrics(metrics_path, {
        "seed": seed, "adjoint_seconds": adjoint_seconds,
        "image_norm": float(np.linalg.norm(image.values)),
    })


@main.command()
@_common_options
@_guard
def verify(config_path, seed, threads, metrics_path):
    """Run the adjoint dot test, sphere-area identity, oracle comparison,
    and gradient checks; print a pass/fail table."""
    threads = _resolve_threads(threads)
    grid, geometry, sampling = load_config(config_path)
    results = run_verification(grid, geometry, sampling, seed, threads)

    click.echo(f"seed = {seed}")
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"{r.name:<{width}}  measured {r.measured:.3e} "
                   f"{r.comparison} {r.threshold:.0e}  {status}")
    metrics = {"seed": seed}
    for r in results:
        key = r.name.replace(" ", "_").replace("(", "").replace(")", "").replace("%", "pct")
        metrics[key] = r.measured
        metrics[key + "_passed"] = r.passed
    _emit_metrics(metrics_path, metrics)
    if not all(r.passed for r in results):
        raise NumericalError("verification failed; see table above")
    click.echo("all checks passed")


@main.command()
@_common_options
@click.option("--sizes", default="32,64,128", show_default=True,
              help="Comma-separated grid sizes m_s for the scaling protocol.")
@click.option("--out-dir", required=True, type=click.Path(),
              help="Directory for the benchmark table and figure.")
@click.option("--repeats", default=3, show_default=True,
              help="Timing repetitions per size (best is kept).")
@_guard
def bench(config_path, seed, threads, metrics_path, sizes, out_dir, repeats):
    """Measure forward wall-time and matrix size across grid sizes and fit
    the power-law exponents."""
    _resolve_threads(threads)
    _, _, sampling = load_config(config_path)
    try:
        size_list = [int(s) for s in sizes.split(",") if s.strip()]
    except ValueError:
        raise ValidationError(f"--sizes must be comma-separated integers, got {sizes!r}")
    if len(size_list) < 2:
        raise ValidationError("--sizes needs at least two grid sizes to fit a power law")

    points = run_bench(size_list, sampling, seed, repeats)
    t_exp = time_exponent(points)
    n_exp = nnz_exponent(points)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "bench.tsv",
                ["m_s", "m_z", "n_radii", "n_heights", "n_voxels", "nnz_xy",
                 "nnz_zl", "nnz_total", "build_seconds", "forward_seconds"],
                [[p.m_s, p.m_z, p.n_radii, p.n_heights, p.n_voxels, p.nnz_xy,
                  p.nnz_zl, p.nnz_total, p.build_seconds, p.forward_seconds]
                 for p in points])
    bench_figure(out / "bench.png", points, t_exp)

    click.echo(f"seed = {seed}")
    for p in points:
        click.echo(f"m_s={p.m_s:4d}  M={p.n_voxels:9d}  nnz={p.nnz_total:10d}  "
                   f"forward={p.forward_seconds * 1e3:9.3f} ms")
    click.echo(f"forward wall-time exponent: {t_exp:.3f}")
    click.echo(f"total nnz exponent:         {n_exp:.3f}")
    click.echo(f"wrote {out / 'bench.tsv'} and {out / 'bench.png'}")
    _emit_metrics(metrics_path, {
        "seed": seed, "time_exponent": t_exp, "nnz_exponent": n_exp,
        **{f"forward_seconds_{p.m_s}": p.forward_seconds for p in points},
        **{f"nnz_total_{p.m_s}": p.nnz_total for p in points},
    })


@main.command()
@_common_options
@click.option("--sinogram", "sinogram_path", required=True, type=click.Path(),
              help="Measured sinogram file (array codec).")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output reconstructed image file (array codec).")
@click.option("--max-iter", default=50, show_default=True)
@click.option("--tol", default=1e-6, show_default=True,
              help="Relative-residual stopping tolerance.")
@click.option("--matrices-dir", default=None, type=click.Path(),
              help="Reuse a matrix cache instead of rebuilding.")
@_guard
def reconstruct(config_path, seed, threads, metrics_path, sinogram_path,
                out_path, max_iter, tol, matrices_dir):
    """Reconstruct an image from a sinogram with least-squares iteration."""
    threads = _resolve_threads(threads)
    if matrices_dir is not None:
        op = _load_cached_operator(config_path, matrices_dir, threads)
    else:
        grid, geometry, sampling = load_config(config_path)
        op = build_aperture_operator(grid, geometry, sampling, threads)
    sinogram = read_sinogram(sinogram_path, op.geometry)

    t0 = time.perf_counter()
    result = cgls(op, sinogram, max_iter, tol)
    solve_seconds = time.perf_counter() - t0

    write_image(out_path, result.final_image)
    stem = Path(out_path)
    residual_table = stem.with_name(stem.stem + "_residuals.tsv")
    residual_plot = stem.with_name(stem.stem + "_residuals.png")
    slice_plot = stem.with_name(stem.stem + "_slice.png")
    write_table(residual_table, ["iteration", "relative_residual"],
                list(enumerate(result.residual_history)))
    residual_figure(residual_plot, result.residual_history)
    slice_figure(slice_plot, result.final_image)

    click.echo(f"seed = {seed}")
    click.echo(f"cgls: {result.iterations} iterations, final relative residual "
               f"{result.residual_history[-1]:.3e} in {solve_seconds:.3f} s")
    click.echo(f"wrote {out_path}, {residual_table}, {residual_plot}, {slice_plot}")
    _emit_metrics(metrics_path, {
        "seed": seed, "iterations": result.iterations,
        "final_relative_residual": result.residual_history[-1],
        "solve_seconds": solve_seconds,
    })


if __name__ == "__main__":
    main()
