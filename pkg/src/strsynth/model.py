"""Learned branch-score predictor: a character-level recurrent regressor.

Given a production and a spec, the model predicts the best ranking score
any program derived through that production could attain.  Topology: the
production id selects an embedding vector that becomes the initial hidden
state of a gated recurrent encoder running over the spec's input strings;
its final state seeds a second encoder running over the rendered output
constraint; a two-layer head (tanh then linear) emits one scalar, which is
denormalized with the training labels' mean and scale.

Everything — forward pass, backpropagation through time, Adam — is
implemented here on plain numpy arrays in float64, validated by central
finite differences.  Spec text is capped at 256 characters per side.

Serialized model layout (little-endian), stable across runs:

    magic   4 bytes  b"SBSM"
    u32     format version (1)
    u32     hidden size H
    u32     character embedding dim E
    u32     character vocab size V
    u32     production count P
    u64     training seed
    f64     label mean
    f64     label scale
    f64     label floor (prune-eligibility line)
    u16+s   symbol id (utf-8, length-prefixed)
    32B     sha-256 of the character vocabulary string
    P x (u16+s)  production ids, in embedding row order
    arrays  each parameter tensor in PARAM_ORDER, raw float32 data

A loaded model predicts bit-identically to the saved one at float32
precision; saving a loaded model reproduces the file byte for byte.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, replace

import numpy as np

from .grammar import GRAMMAR
from .specs import Spec
from .traces import LabelStats, TraceRecord, label_statistics, snapshot_of

NEG_INF = float("-inf")

SEPARATOR = "\x1f"
_PRINTABLE_START, _PRINTABLE_END = 0x20, 0x7E
CHAR_VOCAB = "\x00" + SEPARATOR + "".join(
    chr(c) for c in range(_PRINTABLE_START, _PRINTABLE_END + 1)
)
UNK_ID, SEP_ID = 0, 1
VOCAB_SIZE = len(CHAR_VOCAB)
VOCAB_SHA256 = hashlib.sha256(CHAR_VOCAB.encode("utf-8")).digest()

MAGIC = b"SBSM"
FORMAT_VERSION = 1

PARAM_ORDER = (
    "prod_emb", "char_emb",
    "in_Wz", "in_Wr", "in_Wh", "in_Uz", "in_Ur", "in_Uh", "in_bz", "in_br", "in_bh",
    "out_Wz", "out_Wr", "out_Wh", "out_Uz", "out_Ur", "out_Uh", "out_bz", "out_br", "out_bh",
    "W1", "b1", "w2", "b2",
)


class EmptyDataset(Exception):
    pass


class NonFiniteLoss(Exception):
    pass


@dataclass(frozen=True)
class Hyperparams:
    hidden: int = 64
    char_dim: int = 16
    learning_rate: float = 1e-2
    batch_size: int = 32
    max_epochs: int = 600
    patience: int = 40
    truncate: int = 256
    seed: int = 0
    target_loss: float | None = None
    clip_norm: float | None = None


def _char_id(c: str) -> int:
    o = ord(c)
    if c == SEPARATOR:
        return SEP_ID
    if _PRINTABLE_START <= o <= _PRINTABLE_END:
        return o - _PRINTABLE_START + 2
    return UNK_ID


def render_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, tuple):
        return "%d:%d" % value
    return str(value)


def encode_spec_text(spec_or_snapshot, truncate: int = 256) -> tuple[str, str]:
    """The two encoder-side strings for a spec: inputs and outputs.

    Only the first example is rendered; the example count rides along at
    the end of the output side so multi-example specs stay distinguishable
    from their first example alone.
    """
    snapshot = (
        snapshot_of(spec_or_snapshot)
        if isinstance(spec_or_snapshot, Spec)
        else spec_or_snapshot
    )
    inputs, values = snapshot[0]
    input_text = SEPARATOR.join(inputs)[:truncate]
    output_text = (
        SEPARATOR.join(render_value(v) for v in values)
        + SEPARATOR
        + str(len(snapshot))
    )[:truncate]
    return input_text, output_text


def _ids(text: str) -> np.ndarray:
    return np.fromiter((_char_id(c) for c in text), dtype=np.int64, count=len(text))


class ScoreModel:
    """Per-symbol branch-score regressor over (production, spec) pairs."""

    def __init__(self, symbol: str, params: dict, production_ids: tuple[str, ...],
                 hp: Hyperparams, stats: LabelStats):
        self.symbol = symbol
        self.params = params
        self.production_ids = production_ids
        self.production_index = {p: i for i, p in enumerate(production_ids)}
        self.hp = hp
        self.stats = stats
        self._predict_cache: dict = {}

    # -- construction --------------------------------------------------

    @staticmethod
    def initialize(symbol: str, hp: Hyperparams | None = None,
                   stats: LabelStats | None = None, zero: bool = False) -> "ScoreModel":
        hp = hp or Hyperparams()
        stats = stats or LabelStats(mean=0.0, scale=1.0, min_finite=0.0)
        production_ids = tuple(p.id for p in GRAMMAR.productions_of(symbol))
        rng = np.random.default_rng(hp.seed)
        H, E, V, P = hp.hidden, hp.char_dim, VOCAB_SIZE, len(production_ids)

        def mat(*shape):
            if zero:
                return np.zeros(shape, dtype=np.float64)
            return rng.standard_normal(shape) * 0.08

        params = {"prod_emb": mat(P, H), "char_emb": mat(V, E)}
        for prefix in ("in", "out"):
            for gate in ("Wz", "Wr", "Wh"):
                params["%s_%s" % (prefix, gate)] = mat(E, H)
            for gate in ("Uz", "Ur", "Uh"):
                params["%s_%s" % (prefix, gate)] = mat(H, H)
            for gate in ("bz", "br", "bh"):
                params["%s_%s" % (prefix, gate)] = np.zeros(H, dtype=np.float64)
        params["W1"] = mat(H, H)
        params["b1"] = np.zeros(H, dtype=np.float64)
        params["w2"] = mat(H)
        params["b2"] = np.zeros(1, dtype=np.float64)
        return ScoreModel(symbol, params, production_ids, hp, stats)

    @property
    def label_floor(self) -> float:
        return self.stats.floor

    # -- forward / backward --------------------------------------------

    def _gru_forward(self, prefix: str, ids: np.ndarray, lengths: np.ndarray,
                     h: np.ndarray, cache: list | None):
        p = self.params
        E = p["char_emb"]
        Wz, Wr, Wh = p[prefix + "_Wz"], p[prefix + "_Wr"], p[prefix + "_Wh"]
        Uz, Ur, Uh = p[prefix + "_Uz"], p[prefix + "_Ur"], p[prefix + "_Uh"]
        bz, br, bh = p[prefix + "_bz"], p[prefix + "_br"], p[prefix + "_bh"]
        for t in range(ids.shape[1]):
            ids_t = ids[:, t]
            x = E[ids_t]
            z = _sigmoid(x @ Wz + h @ Uz + bz)
            r = _sigmoid(x @ Wr + h @ Ur + br)
            c = np.tanh(x @ Wh + (r * h) @ Uh + bh)
            mask = (lengths > t).astype(np.float64)[:, None]
            h_new = (1.0 - z) * h + z * c
            h_next = mask * h_new + (1.0 - mask) * h
            if cache is not None:
                cache.append((ids_t, x, h, z, r, c, mask))
            h = h_next
        return h

    def _gru_backward(self, prefix: str, cache: list, dh: np.ndarray, grads: dict):
        p = self.params
        Wz, Wr, Wh = p[prefix + "_Wz"], p[prefix + "_Wr"], p[prefix + "_Wh"]
        Uz, Ur, Uh = p[prefix + "_Uz"], p[prefix + "_Ur"], p[prefix + "_Uh"]
        for ids_t, x, h_prev, z, r, c, mask in reversed(cache):
            dh_gate = dh * mask
            dh_pass = dh * (1.0 - mask)
            dz = dh_gate * (c - h_prev)
            dc = dh_gate * z
            dh_prev = dh_gate * (1.0 - z)
            da_c = dc * (1.0 - c * c)
            grads[prefix + "_Wh"] += x.T @ da_c
            grads[prefix + "_Uh"] += (r * h_prev).T @ da_c
            grads[prefix + "_bh"] += da_c.sum(axis=0)
            d_rh = da_c @ Uh.T
            dr = d_rh * h_prev
            dh_prev += d_rh * r
            da_z = dz * z * (1.0 - z)
            grads[prefix + "_Wz"] += x.T @ da_z
            grads[prefix + "_Uz"] += h_prev.T @ da_z
            grads[prefix + "_bz"] += da_z.sum(axis=0)
            dh_prev += da_z @ Uz.T
            da_r = dr * r * (1.0 - r)
            grads[prefix + "_Wr"] += x.T @ da_r
            grads[prefix + "_Ur"] += h_prev.T @ da_r
            grads[prefix + "_br"] += da_r.sum(axis=0)
            dh_prev += da_r @ Ur.T
            dx = da_z @ Wz.T + da_r @ Wr.T + da_c @ Wh.T
            np.add.at(grads["char_emb"], ids_t, dx)
            dh = dh_prev + dh_pass
        return dh

    def _forward(self, batch, cache: dict | None = None) -> np.ndarray:
        p = self.params
        h = p["prod_emb"][batch["prod"]]
        in_cache = [] if cache is not None else None
        out_cache = [] if cache is not None else None
        h = self._gru_forward("in", batch["in_ids"], batch["in_len"], h, in_cache)
        h = self._gru_forward("out", batch["out_ids"], batch["out_len"], h, out_cache)
        d = np.tanh(h @ p["W1"] + p["b1"])
        y = d @ p["w2"] + p["b2"][0]
        if cache is not None:
            cache.update(in_cache=in_cache, out_cache=out_cache, h_final=h, dense=d)
        return y

    def _backward(self, batch, cache: dict, dy: np.ndarray) -> dict:
        p = self.params
        grads = {name: np.zeros_like(p[name]) for name in PARAM_ORDER}
        d, h = cache["dense"], cache["h_final"]
        grads["w2"] += d.T @ dy
        grads["b2"][0] += dy.sum()
        dd = np.outer(dy, p["w2"])
        da1 = dd * (1.0 - d * d)
        grads["W1"] += h.T @ da1
        grads["b1"] += da1.sum(axis=0)
        dh = da1 @ p["W1"].T
        dh = self._gru_backward("out", cache["out_cache"], dh, grads)
        dh = self._gru_backward("in", cache["in_cache"], dh, grads)
        np.add.at(grads["prod_emb"], batch["prod"], dh)
        return grads

    # -- encoding -------------------------------------------------------

    def _target(self, record: TraceRecord) -> float:
        raw = record.label
        if not math.isfinite(raw):
            raw = self.stats.sentinel_value
        return self.stats.normalize(raw)

    def encode_batch(self, records) -> dict:
        truncate = self.hp.truncate
        texts = [encode_spec_text(r.examples, truncate) for r in records]
        in_len = np.array([len(t[0]) for t in texts], dtype=np.int64)
        out_len = np.array([len(t[1]) for t in texts], dtype=np.int64)
        in_ids = np.zeros((len(records), max(1, int(in_len.max()))), dtype=np.int64)
        out_ids = np.zeros((len(records), max(1, int(out_len.max()))), dtype=np.int64)
        for i, (inp, out) in enumerate(texts):
            in_ids[i, : len(inp)] = _ids(inp)
            out_ids[i, : len(out)] = _ids(out)
        prod = np.array([self.production_index[r.production] for r in records], dtype=np.int64)
        target = np.array([self._target(r) for r in records], dtype=np.float64)
        return {
            "prod": prod, "in_ids": in_ids, "in_len": in_len,
            "out_ids": out_ids, "out_len": out_len, "target": target,
        }

    # -- public API -----------------------------------------------------

    def predict(self, production_id: str, spec) -> float:
        """Score one production branch against a spec (or a raw example snapshot)."""
        snapshot = snapshot_of(spec) if isinstance(spec, Spec) else tuple(spec)
        key = (production_id, snapshot)
        hit = self._predict_cache.get(key)
        if hit is not None:
            return hit
        record = TraceRecord(production_id, self.symbol, 0, key[1], 0.0)
        batch = self.encode_batch([record])
        value = self.stats.denormalize(float(self._forward(batch)[0]))
        self._predict_cache[key] = value
        return value

    def loss(self, records) -> float:
        if not records:
            raise EmptyDataset("loss over an empty batch")
        batch = self.encode_batch(records)
        y = self._forward(batch)
        return float(np.mean((y - batch["target"]) ** 2))

    def loss_and_grads(self, batch) -> tuple[float, dict]:
        cache: dict = {}
        y = self._forward(batch, cache)
        diff = y - batch["target"]
        loss = float(np.mean(diff ** 2))
        dy = 2.0 * diff / len(diff)
        return loss, self._backward(batch, cache, dy)

    # -- serialization ----------------------------------------------------

    def save(self, path) -> None:
        hp, stats = self.hp, self.stats
        out = [MAGIC]
        out.append(struct.pack(
            "<IIIIIQddd", FORMAT_VERSION, hp.hidden, hp.char_dim, VOCAB_SIZE,
            len(self.production_ids), hp.seed, stats.mean, stats.scale, stats.floor,
        ))
        sym = self.symbol.encode("utf-8")
        out.append(struct.pack("<H", len(sym)) + sym)
        out.append(VOCAB_SHA256)
        for pid in self.production_ids:
            raw = pid.encode("utf-8")
            out.append(struct.pack("<H", len(raw)) + raw)
        for name in PARAM_ORDER:
            out.append(np.ascontiguousarray(self.params[name], dtype="<f4").tobytes())
        with open(path, "wb") as fh:
            fh.write(b"".join(out))

    @staticmethod
    def load(path) -> "ScoreModel":
        with open(path, "rb") as fh:
            blob = fh.read()
        if blob[:4] != MAGIC:
            raise ValueError("not a score-model file")
        offset = 4
        (version, hidden, char_dim, vocab_size, prod_count, seed,
         mean, scale, floor) = struct.unpack_from("<IIIIIQddd", blob, offset)
        offset += struct.calcsize("<IIIIIQddd")
        if version != FORMAT_VERSION:
            raise ValueError("unsupported format version %d" % version)
        if vocab_size != VOCAB_SIZE:
            raise ValueError("character vocabulary size mismatch")
        (sym_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        symbol = blob[offset:offset + sym_len].decode("utf-8")
        offset += sym_len
        if blob[offset:offset + 32] != VOCAB_SHA256:
            raise ValueError("character vocabulary hash mismatch")
        offset += 32
        production_ids = []
        for _ in range(prod_count):
            (n,) = struct.unpack_from("<H", blob, offset)
            offset += 2
            production_ids.append(blob[offset:offset + n].decode("utf-8"))
            offset += n
        hp = Hyperparams(hidden=hidden, char_dim=char_dim, seed=seed)
        # Reconstruct min_finite from floor: floor = min_finite - scale.
        stats = LabelStats(mean=mean, scale=scale, min_finite=floor + scale)
        H, E, V, P = hidden, char_dim, vocab_size, prod_count
        shapes = {"prod_emb": (P, H), "char_emb": (V, E), "W1": (H, H),
                  "b1": (H,), "w2": (H,), "b2": (1,)}
        for prefix in ("in", "out"):
            for gate in ("Wz", "Wr", "Wh"):
                shapes["%s_%s" % (prefix, gate)] = (E, H)
            for gate in ("Uz", "Ur", "Uh"):
                shapes["%s_%s" % (prefix, gate)] = (H, H)
            for gate in ("bz", "br", "bh"):
                shapes["%s_%s" % (prefix, gate)] = (H,)
        params = {}
        for name in PARAM_ORDER:
            shape = shapes[name]
            count = int(np.prod(shape))
            arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
            params[name] = arr.reshape(shape).astype(np.float64)
            offset += count * 4
        if offset != len(blob):
            raise ValueError("trailing bytes in model file")
        return ScoreModel(symbol, params, tuple(production_ids), hp, stats)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _clip_gradients(grads: dict, max_norm: float) -> None:
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm:
        factor = max_norm / total
        for g in grads.values():
            g *= factor


class _Adam:
    def __init__(self, params: dict, lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * (g * g)
            params[k] -= self.lr * (self.m[k] / b1c) / (np.sqrt(self.v[k] / b2c) + self.eps)


def train(symbol: str, train_records, val_records=None,
          hp: Hyperparams | None = None, verbose: bool = False,
          on_epoch=None) -> ScoreModel:
    """Fit a score model for one grammar symbol.

    Training minimizes squared error in normalized label space with Adam,
    shuffling per epoch from the seeded generator, and stops early when
    validation loss has not improved for `patience` epochs, restoring the
    best weights seen.  val_records defaults to the training set (useful
    only for overfitting sanity runs).  on_epoch, when given, is called
    with (epoch_index, validation_loss) after every epoch, e.g. to record
    a training curve.
    """
    hp = hp or Hyperparams()
    train_records = [r for r in train_records if r.symbol == symbol]
    if not train_records:
        raise EmptyDataset("no records for symbol %r" % symbol)
    if val_records is None:
        val_records = train_records
    else:
        val_records = [r for r in val_records if r.symbol == symbol] or train_records
    if not any(math.isfinite(r.label) for r in train_records):
        raise EmptyDataset("no finite labels for symbol %r" % symbol)

    stats = label_statistics(train_records)
    model = ScoreModel.initialize(symbol, hp, stats)
    optimizer = _Adam(model.params, hp.learning_rate)
    rng = np.random.default_rng(hp.seed)

    def dataset_loss(records) -> float:
        total, count = 0.0, 0
        for start in range(0, len(records), 256):
            chunk = records[start:start + 256]
            batch = model.encode_batch(chunk)
            y = model._forward(batch)
            total += float(np.sum((y - batch["target"]) ** 2))
            count += len(chunk)
        return total / count

    best_loss = math.inf
    best_params = None
    bad_epochs = 0
    order = np.arange(len(train_records))
    for epoch in range(hp.max_epochs):
        rng.shuffle(order)
        for start in range(0, len(order), hp.batch_size):
            chunk = [train_records[i] for i in order[start:start + hp.batch_size]]
            batch = model.encode_batch(chunk)
            loss, grads = model.loss_and_grads(batch)
            if not math.isfinite(loss):
                raise NonFiniteLoss("loss diverged at epoch %d" % epoch)
            if hp.clip_norm is not None:
                _clip_gradients(grads, hp.clip_norm)
            optimizer.step(model.params, grads)
        val_loss = dataset_loss(val_records)
        if not math.isfinite(val_loss):
            raise NonFiniteLoss("validation loss diverged at epoch %d" % epoch)
        if verbose:
            print("epoch %d: val_loss %.6f" % (epoch, val_loss))
        if on_epoch is not None:
            on_epoch(epoch, val_loss)
        if val_loss < best_loss - 1e-12:
            best_loss = val_loss
            best_params = {k: v.copy() for k, v in model.params.items()}
            bad_epochs = 0
            if hp.target_loss is not None and val_loss <= hp.target_loss:
                break
        else:
            bad_epochs += 1
            if bad_epochs >= hp.patience:
                break
    if best_params is not None:
        model.params = best_params
    model._predict_cache.clear()
    return model


def gradient_check(model: ScoreModel, record: TraceRecord, epsilon: float = 1e-4,
                   samples_per_tensor: int = 4, seed: int = 0) -> float:
    """Max relative error between analytic and central-difference gradients."""
    batch = model.encode_batch([record])
    _, grads = model.loss_and_grads(batch)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name in PARAM_ORDER:
        tensor = model.params[name]
        flat = tensor.reshape(-1)
        n = min(samples_per_tensor, flat.size)
        for idx in rng.choice(flat.size, size=n, replace=False):
            original = flat[idx]
            flat[idx] = original + epsilon
            up = model.loss([record])
            flat[idx] = original - epsilon
            down = model.loss([record])
            flat[idx] = original
            numeric = (up - down) / (2.0 * epsilon)
            analytic = grads[name].reshape(-1)[idx]
            err = abs(analytic - numeric) / (abs(analytic) + abs(numeric) + 1e-8)
            worst = max(worst, err)
    return worst
