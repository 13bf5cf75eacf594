"""Command-line surface: the end-to-end pipeline as composable subcommands.

Exit codes: 0 success, 2 usage error, 3 artifact or config parse error,
4 numeric/solver error. Seeded commands echo their seed as a `# seed=N`
first line in every text file they write.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import formats
from .audio import (
    DEFAULT_HOP,
    DEFAULT_WIN,
    AudioCondition,
    align_features,
    detect_beats,
    onset_envelope,
    read_wav,
)
from .config import PipelineConfig, read_config_file
from .diffusion import Condition, make_schedule, train_denoiser
from .errors import (
    ConfigError,
    FormatError,
    InvalidArgumentError,
    SingularSystemError,
)
from .flow import (
    FLOW_RESOLUTION,
    combine_flow,
    deform_grids,
    occlusion_mask,
    upsample_flow,
    warp_image,
)
from .longgen import generate_long
from .metrics import (
    beat_align_score,
    diversity,
    frechet_distance,
    gesture_beats,
    motion_features,
    summarize,
    velocity_curve,
)
from .motion import clip_windows, unflatten
from .ppm import mask_to_pgm, read_pnm_file, write_pnm_file
from .synth import make_dataset
from .tps import bending_energy, eval_tps, solve_tps


def _load_config(args) -> PipelineConfig:
    cfg = read_config_file(args.config) if args.config else PipelineConfig()
    seed = getattr(args, "seed", None)
    if seed is not None:
        if seed < 0:
            raise InvalidArgumentError("--seed must be >= 0")
        cfg = replace(cfg, seed=seed)
    return cfg


def _write_text(path, lines, seed=None) -> None:
    head = [f"# seed={int(seed)}"] if seed is not None else []
    Path(path).write_text("\n".join(head + list(lines)) + "\n", encoding="utf-8")


def _fmt(value) -> str:
    return repr(float(value))


# -- tps-solve ----------------------------------------------------------

def cmd_tps_solve(args) -> int:
    src, dst = formats.pairs_from_text(Path(args.pairs).read_text(encoding="utf-8"))
    t = solve_tps(src, dst, regularization=args.regularization)
    formats.write_transform(args.out, t)
    mapped = np.array([eval_tps(t, p) for p in dst])
    residual = float(np.linalg.norm(mapped - src, axis=1).max())
    print(f"energy = {_fmt(bending_energy(t))}")
    print(f"max_residual = {_fmt(residual)}")
    print(f"wrote {args.out}")
    return 0


# -- warp ---------------------------------------------------------------

def _compose_flow(transforms, height, width, softness, background):
    """Blend transforms into one flow for an output of the given size.

    Composition happens at FLOW_RESOLUTION when the image is larger,
    then the field is bilinearly upsampled to the image lattice.
    """
    if max(height, width) > FLOW_RESOLUTION:
        h = w = FLOW_RESOLUTION
    else:
        h, w = height, width
    grids = deform_grids(transforms, h, w)
    controls = [t.controls_d for t in transforms]
    field = combine_flow(grids, controls, softness, background=background)
    if (h, w) != (height, width):
        field = upsample_flow(field, height, width)
    return field


def cmd_warp(args) -> int:
    img = read_pnm_file(args.image)
    transforms = [formats.read_transform(p) for p in args.transform]
    field = _compose_flow(
        transforms, img.height, img.width, args.softness, args.background
    )
    write_pnm_file(args.out, warp_image(img, field))
    if args.mask:
        Path(args.mask).write_bytes(mask_to_pgm(occlusion_mask(field)))
    if args.flow_out:
        formats.write_flow(args.flow_out, field)
    print(f"wrote {args.out}")
    return 0


# -- synth-data ---------------------------------------------------------

def cmd_synth_data(args) -> int:
    cfg = _load_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = ["sequence,motion,features,frames,channels,beats"]
    for i, (seq, cond) in enumerate(make_dataset(cfg)):
        motion_name = f"seq_{i:04d}.mdsq"
        feature_name = f"seq_{i:04d}.mdaf"
        formats.write_sequence(out_dir / motion_name, seq)
        formats.write_audio_features(out_dir / feature_name, cond)
        rows.append(
            f"{i},{motion_name},{feature_name},"
            f"{seq.n_frames},{seq.n_channels},{cond.beats.size}"
        )
    _write_text(out_dir / "index.csv", rows, seed=cfg.seed)
    print(f"wrote {cfg.sequences} sequences to {out_dir}")
    return 0


# -- train --------------------------------------------------------------

def _load_dataset_dir(path) -> list:
    data_dir = Path(path)
    seq_paths = sorted(data_dir.glob("*.mdsq"))
    if not seq_paths:
        raise InvalidArgumentError(f"no .mdsq files in {data_dir}")
    pairs = []
    for sp in seq_paths:
        fp = sp.with_suffix(".mdaf")
        if not fp.exists():
            raise InvalidArgumentError(f"no matching .mdaf for {sp.name}")
        pairs.append((formats.read_sequence(sp), formats.read_audio_features(fp)))
    return pairs


def _training_windows(pairs, cfg: PipelineConfig) -> list:
    """Cut each sequence into (motion window, condition) training items.

    Each window is conditioned on its own audio slice and its first
    frame as the seed motion.
    """
    items = []
    for seq, cond in pairs:
        if cond.n_frames != seq.n_frames:
            raise InvalidArgumentError(
                "feature rows do not match motion frames"
            )
        offsets = range(0, seq.n_frames - cfg.m + 1, cfg.stride)
        windows = clip_windows(seq, cfg.m, cfg.stride)
        for off, win in zip(offsets, windows):
            audio = cond.features[off : off + cfg.m]
            items.append((win, Condition(audio, win.frames[0])))
    if not items:
        raise InvalidArgumentError(
            f"no training windows: sequences shorter than m={cfg.m}"
        )
    return items


def cmd_train(args) -> int:
    cfg = _load_config(args)
    dataset = _training_windows(_load_dataset_dir(args.data), cfg)
    model, history = train_denoiser(dataset, cfg)
    formats.write_denoiser(args.out, model)
    if args.loss_csv:
        rows = ["step,probe_loss"]
        rows += [f"{step},{_fmt(loss)}" for step, loss in history]
        _write_text(args.loss_csv, rows, seed=cfg.seed)
    first, last = history[0][1], history[-1][1]
    print(f"trained on {len(dataset)} windows")
    print(f"probe_loss_first = {_fmt(first)}")
    print(f"probe_loss_last = {_fmt(last)}")
    print(f"wrote {args.out}")
    return 0


# -- generate -----------------------------------------------------------

def _render_frames(motion, seed_vec, cfg, src_path, out_dir, seed):
    src_img = read_pnm_file(src_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.k * cfg.n * 2 != motion.n_channels:
        raise InvalidArgumentError(
            f"config k*n*2 = {cfg.k * cfg.n * 2} does not match "
            f"motion channels {motion.n_channels}"
        )
    seed_pts = unflatten(seed_vec[None, :], cfg.k, cfg.n)[0]
    all_pts = unflatten(motion, cfg.k, cfg.n)
    rows = ["frame,file"]
    for i in range(motion.n_frames):
        transforms = [
            solve_tps(seed_pts[k], all_pts[i, k]) for k in range(cfg.k)
        ]
        field = _compose_flow(
            transforms, src_img.height, src_img.width, cfg.softness, True
        )
        name = f"frame_{i:05d}.ppm"
        write_pnm_file(out_dir / name, warp_image(src_img, field))
        rows.append(f"{i},{name}")
    _write_text(out_dir / "frames.csv", rows, seed=seed)


def cmd_generate(args) -> int:
    cfg = _load_config(args)
    if bool(args.render_src) != bool(args.render_dir):
        raise InvalidArgumentError(
            "--render-src and --render-dir must be given together"
        )
    model = formats.read_denoiser(args.params)
    cond = formats.read_audio_features(args.features)
    seed_vec = formats.read_sequence(args.seed_motion).frames[0]
    if seed_vec.size != model.n_channels:
        raise InvalidArgumentError(
            f"seed motion has {seed_vec.size} channels, "
            f"model expects {model.n_channels}"
        )
    if cond.n_channels != model.n_audio:
        raise InvalidArgumentError(
            f"features have {cond.n_channels} channels, "
            f"model expects {model.n_audio}"
        )
    if args.frames is not None:
        m_total = args.frames
    elif args.seconds is not None:
        m_total = int(round(args.seconds * cfg.fps))
    else:
        m_total = cond.n_frames
    sched = make_schedule(cfg.t_steps, cfg.schedule)
    motion, report = generate_long(
        model,
        cond,
        seed_vec,
        m_total,
        sched,
        segment_len=cfg.m,
        candidates=cfg.p,
        gap=cfg.gap,
        seed=cfg.seed,
        gamma=cfg.gamma,
    )
    formats.write_sequence(args.out, motion)
    if args.scores:
        rows = ["segment,candidate,position,angle,total,selected"]
        for seg, cand, score, selected in report:
            rows.append(
                f"{seg},{cand},{_fmt(score.position)},{_fmt(score.angle)},"
                f"{_fmt(score.total)},{int(selected)}"
            )
        _write_text(args.scores, rows, seed=cfg.seed)
    if args.render_src:
        _render_frames(
            motion, seed_vec, cfg, args.render_src, args.render_dir, cfg.seed
        )
    print(f"wrote {motion.n_frames} frames to {args.out}")
    return 0


# -- metrics ------------------------------------------------------------

def _sequences_in(path, what: str) -> list:
    paths = sorted(Path(path).glob("*.mdsq"))
    if not paths:
        raise InvalidArgumentError(f"no .mdsq files in {what} directory {path}")
    return [(p, formats.read_sequence(p)) for p in paths]


def _features_for(path, count: int) -> list:
    """Beat sources for `count` generated sequences.

    A single .mdaf file is shared by all sequences; a directory must
    hold either one file or exactly one per sequence (paired by sorted
    order).
    """
    path = Path(path)
    if path.is_dir():
        paths = sorted(path.glob("*.mdaf"))
        if not paths:
            raise InvalidArgumentError(f"no .mdaf files in {path}")
    else:
        paths = [path]
    if len(paths) == 1:
        paths = paths * count
    if len(paths) != count:
        raise InvalidArgumentError(
            f"{len(paths)} feature files for {count} generated sequences"
        )
    return [formats.read_audio_features(p) for p in paths]


def cmd_metrics(args) -> int:
    cfg = _load_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    generated = _sequences_in(args.generated, "generated")
    reference = _sequences_in(args.reference, "reference")
    conds = _features_for(args.features, len(generated))

    per_rows = ["sequence,file,bas,gesture_beats,audio_beats"]
    curve_rows = ["sequence,frame,speed,smoothed,is_beat"]
    scores = []
    for i, ((path, seq), cond) in enumerate(zip(generated, conds)):
        times = gesture_beats(seq, cfg.sigma_smooth)
        bas = beat_align_score(cond.beats, times, cfg.sigma_b)
        scores.append(bas)
        per_rows.append(
            f"{i},{path.name},{_fmt(bas)},{times.size},{cond.beats.size}"
        )
        frames, raw, smooth, is_beat = velocity_curve(seq, cfg.sigma_smooth)
        for f, r, s, b in zip(frames, raw, smooth, is_beat):
            curve_rows.append(f"{i},{f},{_fmt(r)},{_fmt(s)},{int(b)}")

    def pooled(seqs):
        return np.stack([motion_features(s) for _, s in seqs])

    gen_feats, ref_feats = pooled(generated), pooled(reference)
    div_gen = diversity(gen_feats) if len(generated) >= 2 else math.nan
    div_ref = diversity(ref_feats) if len(reference) >= 2 else math.nan
    if len(generated) >= 2 and len(reference) >= 2:
        frechet = frechet_distance(summarize(gen_feats), summarize(ref_feats))
    else:
        frechet = math.nan

    summary = [
        f"generated = {len(generated)}",
        f"reference = {len(reference)}",
        f"bas = {_fmt(np.mean(scores))}",
        f"diversity_generated = {_fmt(div_gen)}",
        f"diversity_reference = {_fmt(div_ref)}",
        f"frechet = {_fmt(frechet)}",
    ]
    _write_text(out_dir / "summary.txt", summary)
    _write_text(out_dir / "per_sequence.csv", per_rows)
    _write_text(out_dir / "velocity_curves.csv", curve_rows)
    for line in summary:
        print(line)
    return 0


# -- beats --------------------------------------------------------------

def _lag_stack(envelope: np.ndarray, channels: int) -> np.ndarray:
    """Feature matrix whose channel j is the envelope delayed j frames."""
    m = envelope.shape[0]
    out = np.zeros((m, channels))
    for j in range(channels):
        out[j:, j] = envelope[: m - j]
    return out


def cmd_beats(args) -> int:
    clip = read_wav(Path(args.wav).read_bytes())
    envelope = onset_envelope(clip, args.win, args.hop)
    beats = detect_beats(envelope, args.hop, clip.sample_rate, args.ratio)
    rows = ["beat,time_s"] + [f"{i},{_fmt(t)}" for i, t in enumerate(beats)]
    _write_text(args.out, rows)
    if args.features:
        m = math.ceil(clip.samples.size * args.fps / clip.sample_rate)
        m = max(2, m)
        peak = envelope.max()
        if peak > 0:
            envelope = envelope / peak
        frame_env = align_features(
            envelope[:, None], Fraction(clip.sample_rate, args.hop), m, args.fps
        )
        cond = AudioCondition(
            _lag_stack(frame_env[:, 0], args.channels), Fraction(args.fps), beats
        )
        formats.write_audio_features(args.features, cond)
    print(f"{len(beats)} beats in {float(clip.duration):.3f} s")
    return 0


# -- verify -------------------------------------------------------------

def cmd_verify(args) -> int:
    failures = 0
    for path in args.paths:
        try:
            kind, info = formats.verify_file(path)
        except (FormatError, InvalidArgumentError, OSError) as e:
            print(f"{path}: FAILED: {e}")
            failures += 1
        else:
            print(f"{path}: ok: {kind} {info}")
    return 3 if failures else 0


# -- parser -------------------------------------------------------------

def _add_config_and_seed(p, seed_help="override the config seed"):
    p.add_argument("--config", help="pipeline config file (key = value lines)")
    p.add_argument("--seed", type=int, help=seed_help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdgesture",
        description="Audio-conditioned keypoint motion pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tps-solve", help="solve a warp from keypoint pairs")
    p.add_argument("--pairs", required=True, help="pair CSV (src_x,src_y,dst_x,dst_y)")
    p.add_argument("--out", required=True, help="output transform file")
    p.add_argument("--regularization", type=float, default=0.0)
    p.set_defaults(func=cmd_tps_solve)

    p = sub.add_parser("warp", help="warp an image through transforms")
    p.add_argument("--image", required=True, help="source PPM/PGM")
    p.add_argument(
        "--transform", action="append", required=True,
        help="transform file; repeat for multiple",
    )
    p.add_argument("--out", required=True, help="output image")
    p.add_argument("--mask", help="write the occlusion mask PGM here")
    p.add_argument("--flow-out", help="write the composed flow field here")
    p.add_argument("--softness", type=float, default=0.1)
    p.add_argument(
        "--background", action="store_true",
        help="blend in an identity layer so distant pixels stay put",
    )
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("synth-data", help="write a synthetic beat-driven dataset")
    _add_config_and_seed(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth_data)

    p = sub.add_parser("train", help="train the denoiser on a dataset directory")
    _add_config_and_seed(p)
    p.add_argument("--data", required=True, help="directory of .mdsq/.mdaf pairs")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--loss-csv", help="write the probe-loss curve here")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="sample a long motion sequence")
    _add_config_and_seed(p)
    p.add_argument("--params", required=True, help="trained model file")
    p.add_argument("--features", required=True, help="audio feature file")
    p.add_argument(
        "--seed-motion", required=True,
        help="motion file whose first frame seeds generation",
    )
    p.add_argument("--out", required=True, help="output motion file")
    p.add_argument("--scores", help="write the candidate-score CSV here")
    p.add_argument("--frames", type=int, help="total frames (default: feature rows)")
    p.add_argument("--seconds", type=float, help="total duration in seconds")
    p.add_argument("--render-src", help="source image to warp per frame")
    p.add_argument("--render-dir", help="directory for rendered frames")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("metrics", help="score generated motion against a reference")
    p.add_argument("--config", help="pipeline config file (key = value lines)")
    p.add_argument("--generated", required=True, help="directory of .mdsq files")
    p.add_argument("--reference", required=True, help="directory of .mdsq files")
    p.add_argument(
        "--features", required=True,
        help=".mdaf file or directory (beat source per sequence)",
    )
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("beats", help="detect beats in a WAV file")
    p.add_argument("--wav", required=True)
    p.add_argument("--out", required=True, help="beat-time CSV")
    p.add_argument("--win", type=int, default=DEFAULT_WIN)
    p.add_argument("--hop", type=int, default=DEFAULT_HOP)
    p.add_argument("--ratio", type=float, default=1.5)
    p.add_argument("--features", help="also write an audio feature file")
    p.add_argument("--fps", type=int, default=25, help="feature frame rate")
    p.add_argument("--channels", type=int, default=4, help="feature channels")
    p.set_defaults(func=cmd_beats)

    p = sub.add_parser("verify", help="check artifact files")
    p.add_argument("paths", nargs="+", help="artifact files to check")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    try:
        return args.func(args)
    except InvalidArgumentError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (FormatError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except SingularSystemError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
