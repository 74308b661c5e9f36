import numpy as np
import pytest

from dgas.errors import ConfigurationError
from dgas.rnn.cells import CellParams, gru_step, lstm_step


def make_cell(kind: str, k: int, d: int, fill: float = 0.0) -> CellParams:
    gates = 3 if kind == "gru" else 4
    return CellParams(
        kind=kind,
        W=np.full((gates * k, d), fill),
        U=np.full((gates * k, k), fill),
        b=np.full(gates * k, fill),
    )


class TestGruStep:
    def test_zero_parameters_keep_zero_state(self):
        cell = make_cell("gru", 4, 3)
        h = gru_step(np.array([1.0, -2.0, 0.5]), np.zeros(4), cell)
        np.testing.assert_array_equal(h, np.zeros(4))

    def test_update_gate_saturated_open_follows_candidate(self):
        # Large positive update bias: h tracks the candidate, which is 0 here.
        cell = make_cell("gru", 3, 2)
        cell.b[:3] = 50.0
        h_prev = np.array([0.7, -0.3, 0.2])
        h = gru_step(np.array([1.0, 1.0]), h_prev, cell)
        assert np.all(np.abs(h) < 1e-15)

    def test_update_gate_saturated_closed_keeps_state(self):
        cell = make_cell("gru", 3, 2)
        cell.b[:3] = -50.0
        h_prev = np.array([0.7, -0.3, 0.2])
        h = gru_step(np.array([1.0, 1.0]), h_prev, cell)
        np.testing.assert_allclose(h, h_prev, atol=1e-15)

    def test_random_instance_matches_straight_line_formulas(self):
        rng = np.random.default_rng(7)
        k, d = 3, 2
        cell = CellParams(
            kind="gru",
            W=rng.normal(size=(3 * k, d)),
            U=rng.normal(size=(3 * k, k)),
            b=rng.normal(size=3 * k),
        )
        x = rng.normal(size=d)
        h_prev = rng.uniform(-0.9, 0.9, size=k)

        # Independent re-implementation, one gate at a time.
        def sig(v):
            return 1.0 / (1.0 + np.exp(-v))

        wz, wr, wh = cell.W[:k], cell.W[k : 2 * k], cell.W[2 * k :]
        uz, ur, uh = cell.U[:k], cell.U[k : 2 * k], cell.U[2 * k :]
        bz, br, bh = cell.b[:k], cell.b[k : 2 * k], cell.b[2 * k :]
        z = sig(wz @ x + uz @ h_prev + bz)
        r = sig(wr @ x + ur @ h_prev + br)
        g = np.tanh(wh @ x + uh @ (r * h_prev) + bh)
        expected = (1.0 - z) * h_prev + z * g

        np.testing.assert_allclose(gru_step(x, h_prev, cell), expected, rtol=1e-12)

    def test_output_stays_in_open_unit_interval(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            cell = CellParams(
                kind="gru",
                W=rng.normal(scale=3.0, size=(9, 4)),
                U=rng.normal(scale=3.0, size=(9, 3)),
                b=rng.normal(scale=3.0, size=9),
            )
            h_prev = rng.uniform(-1.0, 1.0, size=3) * 0.999
            h = gru_step(rng.normal(size=4), h_prev, cell)
            assert np.all(h > -1.0) and np.all(h < 1.0)

    def test_shape_mismatch_raises(self):
        cell = make_cell("gru", 3, 2)
        with pytest.raises(ConfigurationError):
            gru_step(np.zeros(5), np.zeros(3), cell)
        with pytest.raises(ConfigurationError):
            gru_step(np.zeros(2), np.zeros(4), cell)

    def test_wrong_kind_rejected(self):
        with pytest.raises(ConfigurationError):
            gru_step(np.zeros(2), np.zeros(3), make_cell("lstm", 3, 2))


class TestLstmStep:
    def test_zero_parameters_zero_states(self):
        cell = make_cell("lstm", 4, 3)
        h, c = lstm_step(np.array([1.0, 2.0, 3.0]), np.zeros(4), np.zeros(4), cell)
        np.testing.assert_array_equal(h, np.zeros(4))
        np.testing.assert_array_equal(c, np.zeros(4))

    def test_saturated_gates_preserve_cell_state(self):
        # Forget gate pinned open, input gate pinned shut: c carries over.
        k = 3
        cell = make_cell("lstm", k, 2)
        cell.b[:k] = -50.0        # input gate
        cell.b[k : 2 * k] = 50.0  # forget gate
        c_prev = np.array([1.5, -2.0, 0.25])
        _, c = lstm_step(np.ones(2), np.zeros(k), c_prev, cell)
        np.testing.assert_allclose(c, c_prev, atol=1e-12)

    def test_random_instance_matches_straight_line_formulas(self):
        rng = np.random.default_rng(11)
        k, d = 3, 2
        cell = CellParams(
            kind="lstm",
            W=rng.normal(size=(4 * k, d)),
            U=rng.normal(size=(4 * k, k)),
            b=rng.normal(size=4 * k),
        )
        x = rng.normal(size=d)
        h_prev = rng.uniform(-0.9, 0.9, size=k)
        c_prev = rng.normal(size=k)

        def sig(v):
            return 1.0 / (1.0 + np.exp(-v))

        a = cell.W @ x + cell.U @ h_prev + cell.b
        i, f, o, g = a[:k], a[k : 2 * k], a[2 * k : 3 * k], a[3 * k :]
        c_expected = sig(f) * c_prev + sig(i) * np.tanh(g)
        h_expected = sig(o) * np.tanh(c_expected)

        h, c = lstm_step(x, h_prev, c_prev, cell)
        np.testing.assert_allclose(c, c_expected, rtol=1e-12)
        np.testing.assert_allclose(h, h_expected, rtol=1e-12)

    def test_hidden_bounded_cell_unbounded(self):
        rng = np.random.default_rng(3)
        cell = CellParams(
            kind="lstm",
            W=rng.normal(scale=2.0, size=(12, 2)),
            U=rng.normal(scale=2.0, size=(12, 3)),
            b=rng.normal(scale=2.0, size=12),
        )
        h, c = np.zeros(3), np.zeros(3)
        for _ in range(40):
            h, c = lstm_step(rng.normal(size=2), h, c, cell)
            assert np.all(np.abs(h) < 1.0)
        # Cell state may drift outside (-1, 1).
        assert np.all(np.isfinite(c))
