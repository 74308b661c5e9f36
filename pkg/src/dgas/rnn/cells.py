"""GRU and LSTM cell steps plus full-sequence runners with gradient support.

GRU update, for input x and previous state h:

    z = sigmoid(Wz x + Uz h + bz)          update gate
    r = sigmoid(Wr x + Ur h + br)          reset gate
    g = tanh(Wh x + Uh (r * h) + bh)       candidate state
    h' = (1 - z) * h + z * g

LSTM update, with previous cell state c:

    i = sigmoid(Wi x + Ui h + bi)          input gate
    f = sigmoid(Wf x + Uf h + bf)          forget gate
    o = sigmoid(Wo x + Uo h + bo)          output gate
    g = tanh(Wg x + Ug h + bg)             cell candidate
    c' = f * c + i * g
    h' = o * tanh(c')

The sequence runners precompute the input projections W @ x_t for the whole
sequence in one matrix product (a column gather in one-hot mode), so the
per-step work is only the recurrent product and the pointwise gate math.
Backward passes walk the recorded activations in reverse and defer the
weight-gradient accumulation to whole-sequence matrix products.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError


def sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign to avoid overflow in exp.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class CellParams:
    """Stacked weights of one recurrent direction.

    ``W`` projects the input, ``U`` the previous state, ``b`` is the bias;
    all three stack the gate blocks along axis 0.
    """

    kind: str  # "gru" | "lstm"
    W: np.ndarray
    U: np.ndarray
    b: np.ndarray

    @property
    def hidden_size(self) -> int:
        gates = 3 if self.kind == "gru" else 4
        return self.b.shape[0] // gates

    def gate(self, tensor: np.ndarray, index: int) -> np.ndarray:
        """View of one gate block (0-based, in stacking order)."""
        k = self.hidden_size
        return tensor[index * k : (index + 1) * k]

    def _check(self, x: np.ndarray, h_prev: np.ndarray) -> None:
        gk, d = self.W.shape
        if self.U.shape != (gk, self.hidden_size) or self.b.shape != (gk,):
            raise ConfigurationError("cell parameter shapes are inconsistent")
        if x.shape != (d,):
            raise ConfigurationError(f"input has shape {x.shape}, expected ({d},)")
        if h_prev.shape != (self.hidden_size,):
            raise ConfigurationError(
                f"state has shape {h_prev.shape}, expected ({self.hidden_size},)"
            )


def gru_step(x: np.ndarray, h_prev: np.ndarray, params: CellParams) -> np.ndarray:
    """One GRU update. Output components stay in (-1, 1) whenever h_prev does."""
    if params.kind != "gru":
        raise ConfigurationError("gru_step requires GRU parameters")
    params._check(x, h_prev)
    h, _, _, _ = _gru_step_projected(params.W @ x, h_prev, params.U, params.b, params.hidden_size)
    return h


def lstm_step(
    x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray, params: CellParams
) -> tuple[np.ndarray, np.ndarray]:
    """One LSTM update; returns (hidden state, cell state)."""
    if params.kind != "lstm":
        raise ConfigurationError("lstm_step requires LSTM parameters")
    params._check(x, h_prev)
    h, c, _ = _lstm_step_projected(params.W @ x, h_prev, c_prev, params.U, params.b, params.hidden_size)
    return h, c


def _gru_step_projected(wx, h_prev, U, b, k):
    zr = sigmoid(wx[: 2 * k] + U[: 2 * k] @ h_prev + b[: 2 * k])
    z, r = zr[:k], zr[k:]
    rh = r * h_prev
    g = np.tanh(wx[2 * k :] + U[2 * k :] @ rh + b[2 * k :])
    h = (1.0 - z) * h_prev + z * g
    return h, zr, g, rh


def _lstm_step_projected(wx, h_prev, c_prev, U, b, k):
    a = wx + U @ h_prev + b
    ifo = sigmoid(a[: 3 * k])
    g = np.tanh(a[3 * k :])
    c = ifo[k : 2 * k] * c_prev + ifo[:k] * g
    h = ifo[2 * k : 3 * k] * np.tanh(c)
    return h, c, np.concatenate([ifo, g])


@dataclass
class DirectionTrace:
    """Recorded activations of one direction over one sequence."""

    wx: np.ndarray        # (T, G*K) input projections
    states: np.ndarray    # (T+1, K) hidden states, row 0 is the zero start
    gates: np.ndarray     # GRU: (T, 2K) [z|r]; LSTM: (T, 4K) [i|f|o|g]
    candidates: np.ndarray  # (T, K) tanh candidates (GRU g / LSTM g)
    extra: np.ndarray     # GRU: (T, K) r*h_prev; LSTM: (T+1, K) cell states

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def run_gru(wx: np.ndarray, params: CellParams) -> DirectionTrace:
    """Forward a GRU over precomputed input projections wx (T, 3K)."""
    k = params.hidden_size
    t_len = wx.shape[0]
    states = np.zeros((t_len + 1, k))
    gates = np.empty((t_len, 2 * k))
    candidates = np.empty((t_len, k))
    reset_states = np.empty((t_len, k))
    h = states[0]
    for t in range(t_len):
        h, zr, g, rh = _gru_step_projected(wx[t], h, params.U, params.b, k)
        states[t + 1] = h
        gates[t] = zr
        candidates[t] = g
        reset_states[t] = rh
    return DirectionTrace(wx, states, gates, candidates, reset_states)


def run_lstm(wx: np.ndarray, params: CellParams) -> DirectionTrace:
    """Forward an LSTM over precomputed input projections wx (T, 4K)."""
    k = params.hidden_size
    t_len = wx.shape[0]
    states = np.zeros((t_len + 1, k))
    cells = np.zeros((t_len + 1, k))
    gates = np.empty((t_len, 4 * k))
    h, c = states[0], cells[0]
    for t in range(t_len):
        h, c, acts = _lstm_step_projected(wx[t], h, c, params.U, params.b, k)
        states[t + 1] = h
        cells[t + 1] = c
        gates[t] = acts
    # LSTM candidates are the tail block of the recorded activations.
    return DirectionTrace(wx, states, gates[:, : 3 * k], gates[:, 3 * k :], cells)


def run_direction(wx: np.ndarray, params: CellParams) -> DirectionTrace:
    return run_gru(wx, params) if params.kind == "gru" else run_lstm(wx, params)


def backward_gru(
    trace: DirectionTrace, params: CellParams, d_final: np.ndarray
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """BPTT through one GRU direction.

    ``d_final`` is the loss gradient w.r.t. the final hidden state. Returns
    the gradient w.r.t. the input projections (T, 3K) plus the U and b
    gradients; the caller turns the projection gradient into W/embedding
    gradients because that mapping depends on the input mode.
    """
    k = params.hidden_size
    t_len = trace.wx.shape[0]
    d_act = np.empty((t_len, 3 * k))
    dh = d_final.copy()
    u_zr = params.U[: 2 * k]
    u_g = params.U[2 * k :]
    for t in range(t_len - 1, -1, -1):
        zr = trace.gates[t]
        z, r = zr[:k], zr[k:]
        g = trace.candidates[t]
        h_prev = trace.states[t]
        dz = dh * (g - h_prev)
        dg = dh * z
        da_g = dg * (1.0 - g * g)
        drh = u_g.T @ da_g
        dr = drh * h_prev
        da_zr = np.concatenate([dz, dr]) * zr * (1.0 - zr)
        d_act[t, : 2 * k] = da_zr
        d_act[t, 2 * k :] = da_g
        dh = dh * (1.0 - z) + drh * r + u_zr.T @ da_zr
    dU = np.empty_like(params.U)
    dU[: 2 * k] = d_act[:, : 2 * k].T @ trace.states[:-1]
    dU[2 * k :] = d_act[:, 2 * k :].T @ trace.extra
    return d_act, {"U": dU, "b": d_act.sum(axis=0)}


def backward_lstm(
    trace: DirectionTrace, params: CellParams, d_final: np.ndarray
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """BPTT through one LSTM direction; same contract as :func:`backward_gru`."""
    k = params.hidden_size
    t_len = trace.wx.shape[0]
    d_act = np.empty((t_len, 4 * k))
    dh = d_final.copy()
    dc = np.zeros(k)
    for t in range(t_len - 1, -1, -1):
        gates = trace.gates[t]
        i, f, o = gates[:k], gates[k : 2 * k], gates[2 * k : 3 * k]
        g = trace.candidates[t]
        c = trace.extra[t + 1]
        c_prev = trace.extra[t]
        tanh_c = np.tanh(c)
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c * tanh_c)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        d_act[t, :k] = di * i * (1.0 - i)
        d_act[t, k : 2 * k] = df * f * (1.0 - f)
        d_act[t, 2 * k : 3 * k] = do * o * (1.0 - o)
        d_act[t, 3 * k :] = dg * (1.0 - g * g)
        dh = params.U.T @ d_act[t]
        dc = dc * f
    return d_act, {"U": d_act.T @ trace.states[:-1], "b": d_act.sum(axis=0)}


def backward_direction(
    trace: DirectionTrace, params: CellParams, d_final: np.ndarray
) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    if params.kind == "gru":
        return backward_gru(trace, params, d_final)
    return backward_lstm(trace, params, d_final)
