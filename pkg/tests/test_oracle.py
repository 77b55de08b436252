"""The Fock-space oracle checked on its own terms, then used to arbitrate the closed forms."""
import math

import numpy as np
import pytest

from matterwave_om import BeamState
from matterwave_om.beamstate import normalization_q
from matterwave_om.homodyne import (HomodyneSetting, joint_probability, nu_peak_lowest_order,
                                    resonance_setting)
from matterwave_om.oracle import (BeamSplitter, CutoffError, build_post_collision,
                                  characteristic_from_density, homodyne_from_density,
                                  quadrature_ket, wigner_from_density, wigner_grid_from_density)
from matterwave_om.qmath import displacement_matrix
from matterwave_om.wigner import PhasePoint, axis_nodes, wigner_value

from conftest import oracle_density


def coherent_ket(alpha, n_max):
    return displacement_matrix(alpha, n_max)[:, 0]


def test_density_is_a_state():
    rho = build_post_collision(BeamState(1), 0.5, 0.3, n_max=25)
    rho.validate(psd=True)
    assert rho.min_eigenvalue() > -1e-12


def test_incoherent_density_block_structure():
    rho = oracle_density(2, "incoherent", 1.0, 0.0, 40)
    rho.validate()
    assert rho.hermitian_error() < 1e-14


@pytest.mark.parametrize("mode", ["coherent", "incoherent"])
@pytest.mark.parametrize("N,g,nb", [(1, 0.5, 0.0), (2, 1.0, 0.5), (3, 0.8, 0.3)])
def test_unnormalised_trace_is_q_over_central_binomial(mode, N, g, nb):
    rho = build_post_collision(BeamState(N, mode), g, nb, n_max=40)
    assert rho.raw_trace == pytest.approx(normalization_q(N, g, nb, mode) / math.comb(2 * N, N), rel=1e-9)


def test_incoherent_trace_rules_out_power_of_four():
    rho = build_post_collision(BeamState(3, "incoherent"), 1.0, 0.0, n_max=40)
    assert rho.raw_trace == pytest.approx(1.0, abs=1e-9)
    assert abs(rho.raw_trace - 4 ** 3 / math.comb(6, 3)) > 1


def test_cutoff_error():
    with pytest.raises(CutoffError):
        build_post_collision(BeamState(2), 3.0, 0.0, n_max=10)


def test_wigner_of_coherent_product_state():
    # with N = 0 the state is a thermal product state, W is a product of Gaussians
    rho = build_post_collision(BeamState(0), 1.0, 0.7, n_max=40)
    s = 0.7 + 0.5
    b1, b2 = 0.4 - 0.2j, -0.3 + 0.1j
    ref = math.exp(-(abs(b1) ** 2 + abs(b2) ** 2) / s) / (math.pi * s) ** 2
    assert wigner_from_density(rho, b1, b2) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("mode", ["coherent", "incoherent"])
def test_wigner_closed_form_matches_oracle(mode):
    N, g, nb = 2, 1.0, 0.5
    rho = oracle_density(N, mode, g, nb)
    rng = np.random.default_rng(7)
    b1 = rng.normal(0, 1, 6) + 1j * rng.uniform(-0.5, 2, 6)
    b2 = rng.normal(0, 1, 5) + 1j * rng.uniform(-0.5, 2, 5)
    grid = wigner_grid_from_density(rho, b1, b2)
    closed = wigner_value(PhasePoint(b1[:, None], b2[None, :]), BeamState(N, mode), g, nb)
    assert np.max(np.abs(grid - closed)) < 1e-9


def test_characteristic_function_is_fourier_transform_of_wigner():
    N, g, nb = 1, 0.5, 0.3
    beam = BeamState(N)
    rho = build_post_collision(beam, g, nb, n_max=20)
    x, wx = axis_nodes(5.0, 64)
    y, wy = axis_nodes(5.5, 64)
    X1, Y1, X2, Y2 = np.meshgrid(x, y, x, y, indexing="ij", sparse=True)
    W = wigner_value(PhasePoint(X1 + 1j * Y1, X2 + 1j * Y2), beam, g, nb)
    weight = wx[:, None, None, None] * wy[None, :, None, None] * wx[None, None, :, None] * wy[None, None, None, :]
    Wm = W * weight
    for b1, b2 in [(0.0, 0.0), (0.3, -0.2), (0.7, 0.4), (-1.1, 0.25)]:
        # D(i b) = exp(i sqrt2 b x_hat) and x_hat = sqrt2 Re(beta)
        phase = np.exp(2j * (b1 * X1 + b2 * X2))
        ft = np.sum(Wm * phase)
        assert characteristic_from_density(rho, b1, b2) == pytest.approx(ft, abs=1e-10)


def test_beamsplitter_coherent_state_action():
    n = 40
    bs = BeamSplitter(n)
    b1, b2 = 0.8 - 0.3j, -0.4 + 0.6j
    ket = np.outer(coherent_ket(b1, n), coherent_ket(b2, n)).ravel()
    out = bs.apply(ket)
    ref = np.outer(coherent_ket((b1 + 1j * b2) / math.sqrt(2), n),
                   coherent_ket((1j * b1 + b2) / math.sqrt(2), n)).ravel()
    assert np.max(np.abs(out - ref)) < 1e-12
    assert np.max(np.abs(bs.apply(out, adjoint=True) - ket)) < 1e-12


def test_beamsplitter_unitary():
    bs = BeamSplitter(12)
    for _, U in bs.blocks:
        np.testing.assert_allclose(U.conj().T @ U, np.eye(len(U)), atol=1e-12)
    B = bs.dense()
    np.testing.assert_allclose(B.conj().T @ B, np.eye(144), atol=1e-12)


def test_quadrature_ket_normalisation():
    x, w = axis_nodes(12, 400)
    kets = np.array([quadrature_ket(v, 0.7, 30) for v in x])  # (x, n)
    gram = (kets.conj().T * w) @ kets
    np.testing.assert_allclose(gram, np.eye(30), atol=1e-10)


def test_vacuum_homodyne():
    rho = build_post_collision(BeamState(0), 1.0, 0.0, n_max=20)
    s = HomodyneSetting(0.3, 1.2, 0.0, 0.0)
    assert homodyne_from_density(rho, s) == pytest.approx(1 / math.pi ** 2, rel=1e-12)


@pytest.mark.parametrize("mode", ["coherent", "incoherent"])
def test_homodyne_closed_form_matches_oracle(mode):
    N, g, nb = 2, 1.0, 0.5
    rho = oracle_density(N, mode, g, nb)
    bs = BeamSplitter(rho.n_max)
    rng = np.random.default_rng(3)
    beam = BeamState(N, mode)
    for _ in range(8):
        s = HomodyneSetting(rng.uniform(-math.pi, math.pi), rng.uniform(-math.pi, math.pi),
                            rng.normal(-1.4, 1.0), rng.normal(-1.4, 1.0))
        assert homodyne_from_density(rho, s, bs) == pytest.approx(joint_probability(s, beam, g, nb), abs=1e-10)


def test_nu_reading_arbitrated_by_oracle():
    N, g, nb = 2, 1.0, 0.2
    rho = oracle_density(N, "coherent", g, nb, 40)
    bs = BeamSplitter(40)
    nu = 1e-3
    exact = homodyne_from_density(rho, resonance_setting(N, g, nu), bs)
    inverse = nu_peak_lowest_order(nu, N, g, nb, "coherent", "inverse")
    literal = nu_peak_lowest_order(nu, N, g, nb, "coherent", "literal")
    assert inverse == pytest.approx(exact, rel=1e-3)
    assert literal > 10 * exact
