"""Binary artifact codecs and the artifact verifier.

All five container formats are little-endian with a 4-byte magic:

  MDTP  TPS transform: u32 N, f32 affine(2x3), weights(Nx2), controls(Nx2)
  MDFL  flow field: u32 h, u32 w, f32 map(h*w*2) row-major, mask bytes 0/1
  MDSQ  motion: u32 M, u32 C, u32 fps_num, u32 fps_den, f32 frames(M*C)
  MDAF  features: u32 M, u32 C_a, u32 fps_num, u32 fps_den, u32 beat_count,
        f64 beats, f32 features(M*C_a)
  MDNN  denoiser: u32 layer_count=5, then per layer u32 rows, u32 cols,
        f32 data; layer 0 is a 1x4 meta row [C, C_a, hidden, embed]

Readers validate exact length, finite values, and type invariants, and
raise FormatError on any deviation; writers refuse values that do not
fit float32. Keypoint pair lists travel as CSV with the header
src_x,src_y,dst_x,dst_y.
"""

from __future__ import annotations

import struct
from fractions import Fraction

import numpy as np

from .audio import AudioCondition, read_wav
from .diffusion import MlpDenoiser
from .errors import FormatError, InvalidArgumentError
from .flow import FlowField
from .motion import MotionSequence
from .ppm import parse_pnm
from .tps import TpsTransform

MAGIC_TRANSFORM = b"MDTP"
MAGIC_FLOW = b"MDFL"
MAGIC_SEQUENCE = b"MDSQ"
MAGIC_FEATURES = b"MDAF"
MAGIC_DENOISER = b"MDNN"

PAIRS_HEADER = "src_x,src_y,dst_x,dst_y"


class _Cursor:
    """Sequential reader over bytes that fails loudly on truncation."""

    def __init__(self, data: bytes, what: str):
        self.data = data
        self.pos = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated {self.what}")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f32_array(self, count: int, what: str) -> np.ndarray:
        arr = np.frombuffer(self.take(4 * count), dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(arr)):
            raise FormatError(f"non-finite values in {what}")
        return arr

    def f64_array(self, count: int, what: str) -> np.ndarray:
        arr = np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)
        if not np.all(np.isfinite(arr)):
            raise FormatError(f"non-finite values in {what}")
        return arr

    def expect_magic(self, magic: bytes):
        if self.take(4) != magic:
            raise FormatError(f"bad magic, expected {magic.decode('latin-1')}")

    def done(self):
        if self.pos != len(self.data):
            raise FormatError(f"trailing bytes after {self.what}")


def _f32_bytes(values, what: str) -> bytes:
    with np.errstate(over="ignore"):
        arr = np.ascontiguousarray(values, dtype="<f4")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{what} does not fit float32")
    return arr.tobytes()


def _u32(value: int) -> bytes:
    return struct.pack("<I", value)


def _fraction_fields(fps) -> tuple[int, int]:
    fps = Fraction(fps)
    return fps.numerator, fps.denominator


# -- MDTP ---------------------------------------------------------------

def transform_to_bytes(t: TpsTransform) -> bytes:
    n = t.controls_d.shape[0]
    return (
        MAGIC_TRANSFORM
        + _u32(n)
        + _f32_bytes(t.affine, "affine")
        + _f32_bytes(t.weights, "weights")
        + _f32_bytes(t.controls_d, "controls")
    )


def transform_from_bytes(data: bytes) -> TpsTransform:
    cur = _Cursor(data, "transform file")
    cur.expect_magic(MAGIC_TRANSFORM)
    n = cur.u32()
    if n < 1:
        raise FormatError("transform must have at least one control point")
    affine = cur.f32_array(6, "affine").reshape(2, 3)
    weights = cur.f32_array(2 * n, "weights").reshape(n, 2)
    controls = cur.f32_array(2 * n, "controls").reshape(n, 2)
    cur.done()
    try:
        return TpsTransform(affine, weights, controls)
    except InvalidArgumentError as e:
        raise FormatError(f"invalid transform: {e}") from e


# -- MDFL ---------------------------------------------------------------

def flow_to_bytes(field: FlowField) -> bytes:
    h, w = field.map.shape[:2]
    mask = field.valid_mask.astype(np.uint8)
    return (
        MAGIC_FLOW
        + _u32(h)
        + _u32(w)
        + _f32_bytes(field.map, "flow map")
        + mask.tobytes()
    )


def flow_from_bytes(data: bytes) -> FlowField:
    cur = _Cursor(data, "flow file")
    cur.expect_magic(MAGIC_FLOW)
    h, w = cur.u32(), cur.u32()
    if h < 1 or w < 1:
        raise FormatError("flow dimensions must be positive")
    fmap = cur.f32_array(h * w * 2, "flow map").reshape(h, w, 2)
    mask_bytes = np.frombuffer(cur.take(h * w), dtype=np.uint8)
    cur.done()
    if not np.all((mask_bytes == 0) | (mask_bytes == 1)):
        raise FormatError("mask bytes must be 0 or 1")
    try:
        field = FlowField(fmap)
    except InvalidArgumentError as e:
        raise FormatError(f"invalid flow: {e}") from e
    if not np.array_equal(
        field.valid_mask, mask_bytes.reshape(h, w).astype(bool)
    ):
        raise FormatError("stored mask does not match the flow map")
    return field


# -- MDSQ ---------------------------------------------------------------

def sequence_to_bytes(seq: MotionSequence) -> bytes:
    num, den = _fraction_fields(seq.fps)
    m, c = seq.frames.shape
    return (
        MAGIC_SEQUENCE
        + _u32(m)
        + _u32(c)
        + _u32(num)
        + _u32(den)
        + _f32_bytes(seq.frames, "frames")
    )


def sequence_from_bytes(data: bytes) -> MotionSequence:
    cur = _Cursor(data, "motion file")
    cur.expect_magic(MAGIC_SEQUENCE)
    m, c, num, den = cur.u32(), cur.u32(), cur.u32(), cur.u32()
    if m < 1 or c < 1:
        raise FormatError("motion dimensions must be positive")
    if num < 1 or den < 1:
        raise FormatError("fps fields must be positive")
    frames = cur.f32_array(m * c, "frames").reshape(m, c)
    cur.done()
    try:
        return MotionSequence(frames, Fraction(num, den))
    except InvalidArgumentError as e:
        raise FormatError(f"invalid motion: {e}") from e


# -- MDAF ---------------------------------------------------------------

def audio_features_to_bytes(cond: AudioCondition) -> bytes:
    num, den = _fraction_fields(cond.fps)
    m, c_a = cond.features.shape
    beats = np.ascontiguousarray(cond.beats, dtype="<f8")
    return (
        MAGIC_FEATURES
        + _u32(m)
        + _u32(c_a)
        + _u32(num)
        + _u32(den)
        + _u32(beats.size)
        + beats.tobytes()
        + _f32_bytes(cond.features, "features")
    )


def audio_features_from_bytes(data: bytes) -> AudioCondition:
    cur = _Cursor(data, "feature file")
    cur.expect_magic(MAGIC_FEATURES)
    m, c_a, num, den, n_beats = (
        cur.u32(),
        cur.u32(),
        cur.u32(),
        cur.u32(),
        cur.u32(),
    )
    if m < 1 or c_a < 1:
        raise FormatError("feature dimensions must be positive")
    if num < 1 or den < 1:
        raise FormatError("fps fields must be positive")
    beats = cur.f64_array(n_beats, "beats")
    features = cur.f32_array(m * c_a, "features").reshape(m, c_a)
    cur.done()
    try:
        return AudioCondition(features, Fraction(num, den), beats)
    except InvalidArgumentError as e:
        raise FormatError(f"invalid features: {e}") from e


# -- MDNN ---------------------------------------------------------------

def denoiser_to_bytes(model: MlpDenoiser) -> bytes:
    meta = np.array(
        [[model.n_channels, model.n_audio, model.hidden, model.embed]],
        dtype=np.float64,
    )
    layers = [meta, model.w1, model.b1.reshape(1, -1), model.w2,
              model.b2.reshape(1, -1)]
    out = [MAGIC_DENOISER, _u32(len(layers))]
    for layer in layers:
        out.append(_u32(layer.shape[0]))
        out.append(_u32(layer.shape[1]))
        out.append(_f32_bytes(layer, "layer data"))
    return b"".join(out)


def denoiser_from_bytes(data: bytes) -> MlpDenoiser:
    cur = _Cursor(data, "denoiser file")
    cur.expect_magic(MAGIC_DENOISER)
    n_layers = cur.u32()
    if n_layers != 5:
        raise FormatError("denoiser file must hold exactly 5 layers")
    layers = []
    for i in range(n_layers):
        rows, cols = cur.u32(), cur.u32()
        if rows < 1 or cols < 1:
            raise FormatError("layer dimensions must be positive")
        layers.append(cur.f32_array(rows * cols, f"layer {i}").reshape(rows, cols))
    cur.done()
    meta = layers[0]
    if meta.shape != (1, 4):
        raise FormatError("meta layer must be 1x4")
    if np.any(meta != np.rint(meta)) or np.any(meta < 1):
        raise FormatError("meta layer must hold positive integers")
    c, c_a, hidden, embed = (int(v) for v in meta[0])
    try:
        model = MlpDenoiser(c, c_a, hidden=hidden, embed=embed)
    except (InvalidArgumentError, ValueError) as e:
        raise FormatError(f"invalid denoiser meta: {e}") from e
    w1, b1, w2, b2 = layers[1:]
    expected = {
        "w1": (hidden, model.in_dim),
        "b1": (1, hidden),
        "w2": (c, hidden),
        "b2": (1, c),
    }
    got = {"w1": w1.shape, "b1": b1.shape, "w2": w2.shape, "b2": b2.shape}
    for name in expected:
        if got[name] != expected[name]:
            raise FormatError(
                f"layer {name} is {got[name]}, expected {expected[name]}"
            )
    model.set_flat(
        np.concatenate(
            [w1.ravel(), b1.ravel(), w2.ravel(), b2.ravel()]
        )
    )
    return model


# -- keypoint pair CSV --------------------------------------------------

def pairs_to_text(src, dst, seed=None) -> str:
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    if src.shape != dst.shape or src.ndim != 2 or src.shape[1] != 2:
        raise InvalidArgumentError("src and dst must both be (N, 2)")
    lines = []
    if seed is not None:
        lines.append(f"# seed={int(seed)}")
    lines.append(PAIRS_HEADER)
    for (sx, sy), (dx, dy) in zip(src, dst):
        lines.append(",".join(repr(float(v)) for v in (sx, sy, dx, dy)))
    return "\n".join(lines) + "\n"


def pairs_from_text(text: str):
    src, dst = [], []
    saw_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not saw_header:
            if line != PAIRS_HEADER:
                raise FormatError(
                    f"line {lineno}: expected header '{PAIRS_HEADER}'"
                )
            saw_header = True
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise FormatError(f"line {lineno}: expected 4 comma-separated values")
        try:
            values = [float(p) for p in parts]
        except ValueError as e:
            raise FormatError(f"line {lineno}: {e}") from e
        src.append(values[:2])
        dst.append(values[2:])
    if not saw_header:
        raise FormatError("missing pair header")
    if not src:
        raise FormatError("no pair rows")
    return np.array(src), np.array(dst)


# -- file helpers -------------------------------------------------------

_READERS = {
    MAGIC_TRANSFORM: ("transform", transform_from_bytes),
    MAGIC_FLOW: ("flow", flow_from_bytes),
    MAGIC_SEQUENCE: ("motion", sequence_from_bytes),
    MAGIC_FEATURES: ("features", audio_features_from_bytes),
    MAGIC_DENOISER: ("denoiser", denoiser_from_bytes),
}


def read_transform(path) -> TpsTransform:
    return transform_from_bytes(_read_file(path))


def write_transform(path, t: TpsTransform):
    _write_file(path, transform_to_bytes(t))


def read_flow(path) -> FlowField:
    return flow_from_bytes(_read_file(path))


def write_flow(path, field: FlowField):
    _write_file(path, flow_to_bytes(field))


def read_sequence(path) -> MotionSequence:
    return sequence_from_bytes(_read_file(path))


def write_sequence(path, seq: MotionSequence):
    _write_file(path, sequence_to_bytes(seq))


def read_audio_features(path) -> AudioCondition:
    return audio_features_from_bytes(_read_file(path))


def write_audio_features(path, cond: AudioCondition):
    _write_file(path, audio_features_to_bytes(cond))


def read_denoiser(path) -> MlpDenoiser:
    return denoiser_from_bytes(_read_file(path))


def write_denoiser(path, model: MlpDenoiser):
    _write_file(path, denoiser_to_bytes(model))


def _read_file(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _write_file(path, data: bytes):
    with open(path, "wb") as fh:
        fh.write(data)


def verify_file(path) -> tuple[str, str]:
    """Parse any artifact at `path` and report (kind, summary).

    Raises FormatError when the file is truncated, corrupt, or of an
    unrecognized kind.
    """
    data = _read_file(path)
    if len(data) >= 4 and data[:4] in _READERS:
        kind, reader = _READERS[data[:4]]
        obj = reader(data)
        if kind == "transform":
            info = f"N={obj.controls_d.shape[0]}"
        elif kind == "flow":
            h, w = obj.map.shape[:2]
            info = f"{w}x{h}, {int(obj.valid_mask.sum())} valid"
        elif kind == "motion":
            info = f"M={obj.n_frames} C={obj.n_channels} fps={obj.fps}"
        elif kind == "features":
            info = (
                f"M={obj.n_frames} C_a={obj.n_channels} "
                f"beats={obj.beats.size}"
            )
        else:
            info = (
                f"C={obj.n_channels} C_a={obj.n_audio} "
                f"hidden={obj.hidden} embed={obj.embed}"
            )
        return kind, info
    if data[:2] in (b"P5", b"P6"):
        image = parse_pnm(data)
        kind = "ppm" if image.channels == 3 else "pgm"
        return kind, f"{image.width}x{image.height}"
    if data[:4] == b"RIFF":
        clip = read_wav(data)
        return "wav", f"{clip.samples.size} samples at {clip.sample_rate} Hz"
    raise FormatError("unrecognized artifact")
