"""LSTM and bidirectional LSTM with full backpropagation through time."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class LstmParams:
    """Gate weight matrices of shape (H, H + input_dim); step input is the
    concatenation [h_prev; x_t]."""

    w_i: np.ndarray
    w_f: np.ndarray
    w_o: np.ndarray
    w_c: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_o: np.ndarray
    b_c: np.ndarray

    @classmethod
    def init(cls, input_dim: int, hidden: int, rng: np.random.Generator, dtype=np.float32):
        limit = 1.0 / np.sqrt(hidden)

        def w():
            return rng.uniform(-limit, limit, size=(hidden, hidden + input_dim)).astype(dtype)

        return cls(
            w_i=w(), w_f=w(), w_o=w(), w_c=w(),
            b_i=np.zeros(hidden, dtype=dtype),
            # forget bias 1.0 keeps early cell state flowing
            b_f=np.ones(hidden, dtype=dtype),
            b_o=np.zeros(hidden, dtype=dtype),
            b_c=np.zeros(hidden, dtype=dtype),
        )

    @property
    def hidden(self) -> int:
        return self.w_i.shape[0]

    @property
    def input_dim(self) -> int:
        return self.w_i.shape[1] - self.w_i.shape[0]

    def as_dict(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class Lstm:
    def __init__(self, params: LstmParams):
        self.p = params
        self.grad = {k: np.zeros_like(v) for k, v in params.as_dict().items()}
        self._cache = None

    @classmethod
    def init(cls, input_dim: int, hidden: int, rng: np.random.Generator, dtype=np.float32):
        return cls(LstmParams.init(input_dim, hidden, rng, dtype))

    def forward(self, seq: np.ndarray) -> np.ndarray:
        """seq (T, D) -> hidden states (T, H); h_0 = c_0 = 0."""
        steps, input_dim = seq.shape
        if input_dim != self.p.input_dim:
            raise ValueError(f"expected input dim {self.p.input_dim}, got {input_dim}")
        hidden = self.p.hidden
        w_all = np.concatenate([self.p.w_i, self.p.w_f, self.p.w_o, self.p.w_c], axis=0)
        b_all = np.concatenate([self.p.b_i, self.p.b_f, self.p.b_o, self.p.b_c])
        w_h = np.ascontiguousarray(w_all[:, :hidden])
        # input projections for every step in one matmul; the sequential
        # loop only adds the recurrent term
        a_in = seq @ w_all[:, hidden:].T + b_all
        z = np.zeros((steps, hidden + input_dim), dtype=seq.dtype)
        z[:, hidden:] = seq
        gates = np.zeros((steps, 4, hidden), dtype=seq.dtype)
        c = np.zeros((steps, hidden), dtype=seq.dtype)
        tanh_c = np.zeros((steps, hidden), dtype=seq.dtype)
        h = np.zeros((steps, hidden), dtype=seq.dtype)
        h_prev = np.zeros(hidden, dtype=seq.dtype)
        c_prev = np.zeros(hidden, dtype=seq.dtype)
        for t in range(steps):
            z[t, :hidden] = h_prev
            a = a_in[t] + w_h @ h_prev
            i_t = _sigmoid(a[:hidden])
            f_t = _sigmoid(a[hidden:2 * hidden])
            o_t = _sigmoid(a[2 * hidden:3 * hidden])
            g_t = np.tanh(a[3 * hidden:])
            gates[t] = (i_t, f_t, o_t, g_t)
            c[t] = f_t * c_prev + i_t * g_t
            tanh_c[t] = np.tanh(c[t])
            h[t] = o_t * tanh_c[t]
            h_prev, c_prev = h[t], c[t]
        self._cache = (z, gates, c, tanh_c, w_all, w_h)
        return h

    def backward(self, grad_h: np.ndarray) -> np.ndarray:
        """grad_h (T, H) -> grad w.r.t. seq (T, D); accumulates into self.grad."""
        z, gates, c, tanh_c, w_all, w_h = self._cache
        steps = z.shape[0]
        hidden = self.p.hidden
        da_all = np.zeros((steps, 4 * hidden), dtype=grad_h.dtype)
        dh_next = np.zeros(hidden, dtype=grad_h.dtype)
        dc_next = np.zeros(hidden, dtype=grad_h.dtype)
        for t in range(steps - 1, -1, -1):
            i_t, f_t, o_t, g_t = gates[t]
            c_prev = c[t - 1] if t > 0 else np.zeros(hidden, dtype=c.dtype)
            dh = grad_h[t] + dh_next
            do = dh * tanh_c[t]
            dc = dh * o_t * (1.0 - tanh_c[t] ** 2) + dc_next
            di = dc * g_t
            df = dc * c_prev
            dg = dc * i_t
            dc_next = dc * f_t
            da = da_all[t]
            da[:hidden] = di * i_t * (1.0 - i_t)
            da[hidden:2 * hidden] = df * f_t * (1.0 - f_t)
            da[2 * hidden:3 * hidden] = do * o_t * (1.0 - o_t)
            da[3 * hidden:] = dg * (1.0 - g_t ** 2)
            dh_next = w_h.T @ da
        # weight, bias, and input gradients batch into three matmuls
        grad_w_all = da_all.T @ z
        grad_b_all = da_all.sum(axis=0)
        grad_seq = da_all @ w_all[:, hidden:]
        for idx, name in enumerate(("i", "f", "o", "c")):
            self.grad[f"w_{name}"] += grad_w_all[idx * hidden:(idx + 1) * hidden]
            self.grad[f"b_{name}"] += grad_b_all[idx * hidden:(idx + 1) * hidden]
        return grad_seq

    def params(self) -> dict[str, np.ndarray]:
        return self.p.as_dict()

    def grads(self) -> dict[str, np.ndarray]:
        return self.grad

    def zero_grads(self):
        for g in self.grad.values():
            g[...] = 0


class BiLstm:
    """Runs one LSTM left-to-right and another right-to-left; output at step
    t is [h_t_fwd ; h_t_bwd], width 2H."""

    def __init__(self, fwd: Lstm, bwd: Lstm):
        if fwd.p.hidden != bwd.p.hidden:
            raise ValueError("directions must share hidden size")
        self.fwd = fwd
        self.bwd = bwd

    @classmethod
    def init(cls, input_dim: int, hidden: int, rng: np.random.Generator, dtype=np.float32):
        return cls(Lstm.init(input_dim, hidden, rng, dtype),
                   Lstm.init(input_dim, hidden, rng, dtype))

    @property
    def hidden(self) -> int:
        return self.fwd.p.hidden

    def forward(self, seq: np.ndarray) -> np.ndarray:
        h_f = self.fwd.forward(seq)
        h_b = self.bwd.forward(seq[::-1])[::-1]
        return np.concatenate([h_f, h_b], axis=1)

    def backward(self, grad_h: np.ndarray) -> np.ndarray:
        hidden = self.hidden
        grad_f = self.fwd.backward(np.ascontiguousarray(grad_h[:, :hidden]))
        grad_b = self.bwd.backward(np.ascontiguousarray(grad_h[::-1, hidden:]))
        return grad_f + grad_b[::-1]

    def params(self) -> dict[str, np.ndarray]:
        out = {f"fwd.{k}": v for k, v in self.fwd.params().items()}
        out.update({f"bwd.{k}": v for k, v in self.bwd.params().items()})
        return out

    def grads(self) -> dict[str, np.ndarray]:
        out = {f"fwd.{k}": v for k, v in self.fwd.grads().items()}
        out.update({f"bwd.{k}": v for k, v in self.bwd.grads().items()})
        return out

    def zero_grads(self):
        self.fwd.zero_grads()
        self.bwd.zero_grads()
