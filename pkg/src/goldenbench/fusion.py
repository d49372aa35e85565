"""Desk-scale fusion mechanisms over paired hidden sequences, with analytic
backward passes and a finite-difference verification harness.

Four mechanisms combine an original-speech hidden sequence h_org (T, d)
with a synthesized-speech sequence h_syn:

    add   elementwise sum
    att   h_org + MHA(query=h_org, key=h_syn, value=h_syn)
    gate  g = sigmoid(h_org W_org + h_syn W_syn + b);
          out = g * h_org + (1 - g) * h_syn
    cat   concat along channels, then a linear layer back to d

add, gate, and cat first resample h_syn to h_org's frame count by linear
interpolation (a deterministic, differentiable choice); att handles
unequal lengths natively.  Everything runs in float64: the verification
harness compares analytic gradients of the sum-of-squares loss against
central finite differences, which is unreliable in 32-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Mechanism(str, Enum):
    ADD = "add"
    ATT = "att"
    GATE = "gate"
    CAT = "cat"


@dataclass(eq=False)
class MhaParams:
    n_heads: int
    w_q: np.ndarray
    w_k: np.ndarray
    w_v: np.ndarray
    w_o: np.ndarray
    b_q: np.ndarray | None = None
    b_k: np.ndarray | None = None
    b_v: np.ndarray | None = None
    b_o: np.ndarray | None = None

    def __post_init__(self):
        d = self.w_q.shape[0]
        for name in ("w_q", "w_k", "w_v", "w_o"):
            w = getattr(self, name)
            if w.shape != (d, d):
                raise ValueError(f"{name} must be ({d}, {d}), got {w.shape}")
        if self.n_heads < 1 or d % self.n_heads != 0:
            raise ValueError(f"dim {d} not divisible by n_heads {self.n_heads}")

    @property
    def dim(self) -> int:
        return self.w_q.shape[0]


@dataclass(eq=False)
class GateParams:
    w_org: np.ndarray
    w_syn: np.ndarray
    bias: np.ndarray


@dataclass(eq=False)
class CatParams:
    weight: np.ndarray  # (2d, d)
    bias: np.ndarray


@dataclass(eq=False)
class FusionParams:
    mechanism: Mechanism
    mha: MhaParams | None = None
    gate: GateParams | None = None
    cat: CatParams | None = None

    def __post_init__(self):
        required = {
            Mechanism.ADD: None,
            Mechanism.ATT: "mha",
            Mechanism.GATE: "gate",
            Mechanism.CAT: "cat",
        }[self.mechanism]
        for name in ("mha", "gate", "cat"):
            if (getattr(self, name) is not None) != (name == required):
                raise ValueError(
                    f"mechanism {self.mechanism.value!r} requires exactly its own "
                    f"parameter block ({required or 'none'})"
                )


@dataclass(frozen=True)
class GradCheckReport:
    mechanism: str
    max_abs_error: float
    max_rel_error: float
    worst_coordinate: str
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def _as_tensor(x: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a (frames, channels) matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def resample_matrix(source_t: int, target_t: int) -> np.ndarray:
    """Linear-interpolation operator R so that R @ H resamples the frame axis."""
    if target_t < 1:
        raise ValueError("target frame count must be >= 1")
    r = np.zeros((target_t, source_t))
    if target_t == 1:
        r[0, 0] = 1.0
        return r
    positions = np.linspace(0.0, source_t - 1, target_t)
    for k, pos in enumerate(positions):
        lo = int(np.floor(pos))
        hi = min(lo + 1, source_t - 1)
        frac = pos - lo
        r[k, lo] += 1.0 - frac
        if hi != lo:
            r[k, hi] += frac
    return r


def resample_time(h: np.ndarray, target_t: int) -> np.ndarray:
    """Resample a (T, d) sequence to (target_t, d); identity when lengths match."""
    h = _as_tensor(h, "h")
    if target_t == h.shape[0]:
        return h.copy()
    return resample_matrix(h.shape[0], target_t) @ h


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# Multi-head attention
# ---------------------------------------------------------------------------


def _split_heads(x: np.ndarray, n_heads: int) -> np.ndarray:
    t, d = x.shape
    return x.reshape(t, n_heads, d // n_heads).transpose(1, 0, 2)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    h, t, dh = x.shape
    return x.transpose(1, 0, 2).reshape(t, h * dh)


def _mha_forward(
    q_in: np.ndarray, k_in: np.ndarray, v_in: np.ndarray, params: MhaParams
) -> tuple[np.ndarray, dict]:
    d = params.dim
    if q_in.shape[1] != d or k_in.shape[1] != d or v_in.shape[1] != d:
        raise ValueError("query/key/value channel dims must match the projections")
    if k_in.shape[0] != v_in.shape[0]:
        raise ValueError("key and value must have the same frame count")
    qp = q_in @ params.w_q + (params.b_q if params.b_q is not None else 0.0)
    kp = k_in @ params.w_k + (params.b_k if params.b_k is not None else 0.0)
    vp = v_in @ params.w_v + (params.b_v if params.b_v is not None else 0.0)
    qh = _split_heads(qp, params.n_heads)
    kh = _split_heads(kp, params.n_heads)
    vh = _split_heads(vp, params.n_heads)
    scale = 1.0 / np.sqrt(d // params.n_heads)
    scores = (qh @ kh.transpose(0, 2, 1)) * scale
    attn = _softmax(scores)
    heads = attn @ vh
    concat = _merge_heads(heads)
    out = concat @ params.w_o + (params.b_o if params.b_o is not None else 0.0)
    cache = {
        "q_in": q_in, "k_in": k_in, "v_in": v_in,
        "qh": qh, "kh": kh, "vh": vh,
        "attn": attn, "concat": concat, "scale": scale,
    }
    return out, cache


def _mha_backward(params: MhaParams, cache: dict, d_out: np.ndarray) -> dict[str, np.ndarray]:
    n_heads = params.n_heads
    grads: dict[str, np.ndarray] = {}
    grads["w_o"] = cache["concat"].T @ d_out
    if params.b_o is not None:
        grads["b_o"] = d_out.sum(axis=0)
    d_concat = d_out @ params.w_o.T
    d_heads = _split_heads(d_concat, n_heads)

    attn, vh, qh, kh = cache["attn"], cache["vh"], cache["qh"], cache["kh"]
    d_attn = d_heads @ vh.transpose(0, 2, 1)
    d_vh = attn.transpose(0, 2, 1) @ d_heads
    # Row-wise softmax Jacobian: a * (g - sum(g * a)).
    d_scores = attn * (d_attn - (d_attn * attn).sum(axis=-1, keepdims=True))
    scale = cache["scale"]
    d_qh = (d_scores @ kh) * scale
    d_kh = (d_scores.transpose(0, 2, 1) @ qh) * scale

    d_qp = _merge_heads(d_qh)
    d_kp = _merge_heads(d_kh)
    d_vp = _merge_heads(d_vh)
    grads["w_q"] = cache["q_in"].T @ d_qp
    grads["w_k"] = cache["k_in"].T @ d_kp
    grads["w_v"] = cache["v_in"].T @ d_vp
    if params.b_q is not None:
        grads["b_q"] = d_qp.sum(axis=0)
    if params.b_k is not None:
        grads["b_k"] = d_kp.sum(axis=0)
    if params.b_v is not None:
        grads["b_v"] = d_vp.sum(axis=0)
    grads["q_in"] = d_qp @ params.w_q.T
    grads["k_in"] = d_kp @ params.w_k.T
    grads["v_in"] = d_vp @ params.w_v.T
    return grads


def mha_forward(
    q: np.ndarray, k: np.ndarray, v: np.ndarray, params: MhaParams
) -> np.ndarray:
    """Scaled dot-product multi-head attention; output shape (Q frames, d)."""
    out, _ = _mha_forward(_as_tensor(q, "q"), _as_tensor(k, "k"), _as_tensor(v, "v"), params)
    return out


# ---------------------------------------------------------------------------
# Fusion mechanisms: forward passes with caches, and backward passes
# ---------------------------------------------------------------------------


def _forward(
    params: FusionParams, h_org: np.ndarray, h_syn: np.ndarray
) -> tuple[np.ndarray, dict]:
    h_org = _as_tensor(h_org, "h_org")
    h_syn = _as_tensor(h_syn, "h_syn")
    if h_org.shape[1] != h_syn.shape[1]:
        raise ValueError(f"channel mismatch: {h_org.shape[1]} vs {h_syn.shape[1]}")
    mech = params.mechanism

    if mech is Mechanism.ATT:
        mha_out, mha_cache = _mha_forward(h_org, h_syn, h_syn, params.mha)
        return h_org + mha_out, {"mha": mha_cache}

    r = resample_matrix(h_syn.shape[0], h_org.shape[0])
    syn_r = r @ h_syn
    if mech is Mechanism.ADD:
        return h_org + syn_r, {"r": r}
    if mech is Mechanism.GATE:
        g = params.gate
        z = h_org @ g.w_org + syn_r @ g.w_syn + g.bias
        gates = _sigmoid(z)
        out = gates * h_org + (1.0 - gates) * syn_r
        return out, {"r": r, "syn_r": syn_r, "h_org": h_org, "gates": gates}
    c = params.cat
    stacked = np.hstack([h_org, syn_r])
    out = stacked @ c.weight + c.bias
    return out, {"r": r, "stacked": stacked}


def _backward(
    params: FusionParams, cache: dict, d_out: np.ndarray
) -> dict[str, np.ndarray]:
    mech = params.mechanism
    if mech is Mechanism.ATT:
        mha_grads = _mha_backward(params.mha, cache["mha"], d_out)
        grads = {k: v for k, v in mha_grads.items() if not k.endswith("_in")}
        grads["h_org"] = d_out + mha_grads["q_in"]
        grads["h_syn"] = mha_grads["k_in"] + mha_grads["v_in"]
        return grads

    r = cache["r"]
    if mech is Mechanism.ADD:
        return {"h_org": d_out.copy(), "h_syn": r.T @ d_out}
    if mech is Mechanism.GATE:
        g = params.gate
        gates, syn_r, h_org = cache["gates"], cache["syn_r"], cache["h_org"]
        d_gates = d_out * (h_org - syn_r)
        d_z = d_gates * gates * (1.0 - gates)
        d_syn_r = d_out * (1.0 - gates) + d_z @ g.w_syn.T
        return {
            "w_org": h_org.T @ d_z,
            "w_syn": syn_r.T @ d_z,
            "bias": d_z.sum(axis=0),
            "h_org": d_out * gates + d_z @ g.w_org.T,
            "h_syn": r.T @ d_syn_r,
        }
    c = params.cat
    stacked = cache["stacked"]
    d = d_out.shape[1]
    d_stacked = d_out @ c.weight.T
    return {
        "weight": stacked.T @ d_out,
        "bias": d_out.sum(axis=0),
        "h_org": d_stacked[:, :d],
        "h_syn": r.T @ d_stacked[:, d:],
    }


def fuse(params: FusionParams, h_org: np.ndarray, h_syn: np.ndarray) -> np.ndarray:
    """Apply the configured mechanism; output shape is (h_org frames, d)."""
    out, _ = _forward(params, h_org, h_syn)
    return out


def fuse_add(h_org: np.ndarray, h_syn: np.ndarray) -> np.ndarray:
    return fuse(FusionParams(Mechanism.ADD), h_org, h_syn)


def fuse_att(h_org: np.ndarray, h_syn: np.ndarray, params: FusionParams) -> np.ndarray:
    if params.mechanism is not Mechanism.ATT:
        raise ValueError("fuse_att requires attention parameters")
    return fuse(params, h_org, h_syn)


def fuse_gate(h_org: np.ndarray, h_syn: np.ndarray, params: FusionParams) -> np.ndarray:
    if params.mechanism is not Mechanism.GATE:
        raise ValueError("fuse_gate requires gate parameters")
    return fuse(params, h_org, h_syn)


def fuse_cat(h_org: np.ndarray, h_syn: np.ndarray, params: FusionParams) -> np.ndarray:
    if params.mechanism is not Mechanism.CAT:
        raise ValueError("fuse_cat requires concatenation parameters")
    return fuse(params, h_org, h_syn)


# ---------------------------------------------------------------------------
# Gradient verification
# ---------------------------------------------------------------------------


def _param_blocks(params: FusionParams) -> dict[str, np.ndarray]:
    if params.mechanism is Mechanism.ATT:
        m = params.mha
        blocks = {"w_q": m.w_q, "w_k": m.w_k, "w_v": m.w_v, "w_o": m.w_o}
        for name in ("b_q", "b_k", "b_v", "b_o"):
            b = getattr(m, name)
            if b is not None:
                blocks[name] = b
        return blocks
    if params.mechanism is Mechanism.GATE:
        g = params.gate
        return {"w_org": g.w_org, "w_syn": g.w_syn, "bias": g.bias}
    if params.mechanism is Mechanism.CAT:
        return {"weight": params.cat.weight, "bias": params.cat.bias}
    return {}


def copy_params(params: FusionParams) -> FusionParams:
    if params.mechanism is Mechanism.ATT:
        m = params.mha
        return FusionParams(
            Mechanism.ATT,
            mha=MhaParams(
                n_heads=m.n_heads,
                w_q=m.w_q.copy(), w_k=m.w_k.copy(), w_v=m.w_v.copy(), w_o=m.w_o.copy(),
                b_q=None if m.b_q is None else m.b_q.copy(),
                b_k=None if m.b_k is None else m.b_k.copy(),
                b_v=None if m.b_v is None else m.b_v.copy(),
                b_o=None if m.b_o is None else m.b_o.copy(),
            ),
        )
    if params.mechanism is Mechanism.GATE:
        g = params.gate
        return FusionParams(
            Mechanism.GATE,
            gate=GateParams(w_org=g.w_org.copy(), w_syn=g.w_syn.copy(), bias=g.bias.copy()),
        )
    if params.mechanism is Mechanism.CAT:
        c = params.cat
        return FusionParams(
            Mechanism.CAT, cat=CatParams(weight=c.weight.copy(), bias=c.bias.copy())
        )
    return FusionParams(Mechanism.ADD)


def analytic_gradients(
    params: FusionParams, h_org: np.ndarray, h_syn: np.ndarray
) -> dict[str, np.ndarray]:
    """Gradients of loss = sum(fuse(...)**2) for inputs and all parameters."""
    out, cache = _forward(params, h_org, h_syn)
    return _backward(params, cache, 2.0 * out)


def finite_difference_gradients(
    params: FusionParams, h_org: np.ndarray, h_syn: np.ndarray, step: float = 1e-5
) -> dict[str, np.ndarray]:
    """Central-difference gradients of the same loss, coordinate by coordinate."""
    if step <= 0:
        raise ValueError("step must be positive")
    work = copy_params(params)
    blocks = {"h_org": _as_tensor(h_org, "h_org").copy(),
              "h_syn": _as_tensor(h_syn, "h_syn").copy()}
    blocks.update(_param_blocks(work))

    def loss() -> float:
        out = fuse(work, blocks["h_org"], blocks["h_syn"])
        return float(np.sum(out * out))

    grads: dict[str, np.ndarray] = {}
    for name, arr in blocks.items():
        grad = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        for idx in range(flat.size):
            saved = flat[idx]
            flat[idx] = saved + step
            plus = loss()
            flat[idx] = saved - step
            minus = loss()
            flat[idx] = saved
            gflat[idx] = (plus - minus) / (2.0 * step)
        grads[name] = grad
    return grads


# Coordinates whose gradient magnitude falls below this floor are compared
# absolutely; finite-difference roundoff otherwise dominates their ratio.
_REL_FLOOR = 1e-3


def compare_gradients(
    mechanism: str,
    analytic: dict[str, np.ndarray],
    numeric: dict[str, np.ndarray],
    tolerance: float,
) -> GradCheckReport:
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    if set(analytic) != set(numeric):
        raise ValueError(f"gradient blocks differ: {sorted(analytic)} vs {sorted(numeric)}")
    max_abs = 0.0
    max_rel = 0.0
    worst = ""
    for name in sorted(analytic):
        a = analytic[name].reshape(-1)
        n = numeric[name].reshape(-1)
        if a.shape != n.shape:
            raise ValueError(f"block {name!r} shape mismatch")
        abs_err = np.abs(a - n)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), _REL_FLOOR)
        rel_err = abs_err / denom
        idx = int(np.argmax(rel_err))
        if rel_err[idx] > max_rel:
            max_rel = float(rel_err[idx])
            worst = f"{name}[{idx}]"
        max_abs = max(max_abs, float(abs_err.max()))
    return GradCheckReport(
        mechanism=mechanism,
        max_abs_error=max_abs,
        max_rel_error=max_rel,
        worst_coordinate=worst,
        tolerance=tolerance,
    )


def grad_check(
    params: FusionParams,
    h_org: np.ndarray,
    h_syn: np.ndarray,
    tolerance: float = 1e-4,
    step: float = 1e-5,
) -> GradCheckReport:
    """Verify analytic gradients against central finite differences."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    analytic = analytic_gradients(params, h_org, h_syn)
    numeric = finite_difference_gradients(params, h_org, h_syn, step=step)
    return compare_gradients(params.mechanism.value, analytic, numeric, tolerance)


def init_params(
    mechanism: Mechanism | str, d: int, n_heads: int = 1, seed: int = 0
) -> FusionParams:
    """Uniform [-1/sqrt(d), 1/sqrt(d)] initialization, reproducible from seed."""
    mechanism = Mechanism(mechanism)
    if d < 1:
        raise ValueError("d must be >= 1")
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(d)

    def u(*shape: int) -> np.ndarray:
        return rng.uniform(-scale, scale, size=shape)

    if mechanism is Mechanism.ADD:
        return FusionParams(Mechanism.ADD)
    if mechanism is Mechanism.ATT:
        if n_heads < 1 or d % n_heads != 0:
            raise ValueError(f"dim {d} not divisible by n_heads {n_heads}")
        return FusionParams(
            Mechanism.ATT,
            mha=MhaParams(
                n_heads=n_heads,
                w_q=u(d, d), w_k=u(d, d), w_v=u(d, d), w_o=u(d, d),
                b_q=u(d), b_k=u(d), b_v=u(d), b_o=u(d),
            ),
        )
    if mechanism is Mechanism.GATE:
        return FusionParams(
            Mechanism.GATE, gate=GateParams(w_org=u(d, d), w_syn=u(d, d), bias=u(d))
        )
    return FusionParams(Mechanism.CAT, cat=CatParams(weight=u(2 * d, d), bias=u(d)))


def random_inputs(
    t_org: int, t_syn: int, d: int, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic standard-normal input pair for checks and smoke tests."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((t_org, d)), rng.standard_normal((t_syn, d))
