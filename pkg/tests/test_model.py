import math

import numpy as np
import pytest

from dressed_cool.config import Config, to_system_params
from dressed_cool.model import (
    TWO_PI,
    SystemParams,
    build_effective_jc,
    build_hamiltonian_displaced,
    build_hamiltonian_undisplaced,
    choose_fock_cutoff,
    collapse_ops,
    dispersive_map,
    displacement,
    drive_for_photons,
    n_bar_of,
    qubit_axis_state,
    turn_on_state,
)
from dressed_cool.operators import (
    HilbertSpace,
    annihilation,
    creation,
    expect_real,
    expectation,
    identity,
    kron,
    pauli,
    validate_density_matrix,
)


def reference_params(**overrides) -> SystemParams:
    overrides.setdefault("thermal_qubit", False)
    return to_system_params(Config(**overrides))


# ---------------------------------------------------------------------------
# frame transformations


def test_dispersive_map_reference_point():
    g = TWO_PI * 70.0
    delta = TWO_PI * (5025.8 - 6826.0)
    chi, omega_r = dispersive_map(g, delta, 0.0)
    assert chi / TWO_PI == pytest.approx(-2.722, abs=5e-4)
    assert omega_r == 0.0
    _, omega_r = dispersive_map(g, delta, TWO_PI * 10.0)
    assert omega_r / TWO_PI == pytest.approx(0.778, abs=5e-4)


def test_dispersive_map_rejects_degenerate():
    with pytest.raises(ValueError):
        dispersive_map(1.0, 0.0, 0.0)


def test_displacement_zero_drive():
    fr = displacement(0.0, -1.0, 2.0)
    assert fr.a_bar == 0.0 and fr.n_bar == 0.0


def test_displacement_reference_operating_point():
    fr = displacement(TWO_PI * 17.56, TWO_PI * -9.0, TWO_PI * 4.3)
    assert fr.n_bar == pytest.approx(3.60, abs=5e-3)
    assert fr.n_bar == pytest.approx(abs(fr.a_bar) ** 2, rel=1e-12)


def test_drive_for_photons_reference_values():
    assert drive_for_photons(0.0, -5.0, 1.0) == 0.0
    eps = drive_for_photons(1.0, TWO_PI * -9.0, TWO_PI * 4.3)
    assert eps == pytest.approx(math.sqrt(81.0 + 2.15**2) * TWO_PI, rel=1e-12)
    assert eps / TWO_PI == pytest.approx(9.253, abs=1e-3)
    eps = drive_for_photons(3.6, TWO_PI * -9.0, TWO_PI * 4.3)
    assert eps / TWO_PI == pytest.approx(17.56, abs=5e-3)
    eps = drive_for_photons(3.31, TWO_PI * -9.0, TWO_PI * 0.2)
    assert eps / TWO_PI == pytest.approx(16.38, abs=5e-3)


def test_displacement_round_trip_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n_bar = float(rng.uniform(0.0, 20.0))
        delta_c = float(rng.uniform(-100.0, 100.0))
        kappa = float(rng.uniform(0.1, 50.0))
        eps = drive_for_photons(n_bar, delta_c, kappa)
        back = displacement(eps, delta_c, kappa).n_bar
        assert back == pytest.approx(n_bar, rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------------------
# Hamiltonian builders


def test_displaced_hamiltonian_rabi_only():
    p = SystemParams(
        chi=0.0, kappa=1.0, omega_r_rabi=4.0, delta_c=0.0,
        delta_q_prime=0.0, eps_d=0.0, gamma_down=0.0, gamma_up=0.0,
        gamma_phi=0.0, n_fock=5,
    )
    h = build_hamiltonian_displaced(p)
    vals = np.sort(np.linalg.eigvalsh(h))
    assert np.allclose(vals[:5], -2.0) and np.allclose(vals[5:], 2.0)


def test_displaced_hamiltonian_diagonal_without_drive():
    p = SystemParams(
        chi=-0.5, kappa=1.0, omega_r_rabi=0.0, delta_c=-3.0,
        delta_q_prime=1.0, eps_d=0.0, gamma_down=0.0, gamma_up=0.0,
        gamma_phi=0.0, n_fock=6,
    )
    h = build_hamiltonian_displaced(p)
    assert np.max(np.abs(h - np.diag(np.diag(h)))) == 0.0


def test_displaced_hamiltonian_matches_hand_assembly():
    p = reference_params(n_bar=1.0, n_fock=12)
    h = build_hamiltonian_displaced(p)
    assert np.max(np.abs(h - h.conj().T)) <= 1e-12

    a_bar = displacement(p.eps_d, p.delta_c, p.kappa).a_bar
    n = p.n_fock
    a = annihilation(n)
    num = creation(n) @ a
    fluct = np.conj(a_bar) * a + a_bar * creation(n) + num
    expected = (
        -p.delta_c * kron(identity(2), num)
        - 0.5 * p.delta_q_prime * kron(pauli("z"), identity(n))
        - 0.5 * p.omega_r_rabi * kron(pauli("x"), identity(n))
        - p.chi * kron(pauli("z"), fluct)
    )
    assert np.allclose(h, expected, atol=1e-12)


def test_undisplaced_block_structure_without_coupling():
    p = SystemParams(
        chi=0.0, kappa=2.0, omega_r_rabi=1.5, delta_c=-4.0,
        delta_q_prime=0.7, eps_d=0.0, gamma_down=0.0, gamma_up=0.0,
        gamma_phi=0.0, n_fock=5,
    )
    h = build_hamiltonian_undisplaced(p)
    n = p.n_fock
    h_cav = -p.delta_c * (creation(n) @ annihilation(n))
    h_qub = -0.5 * p.delta_q_prime * pauli("z") - 0.5 * p.omega_r_rabi * pauli("x")
    expected = kron(identity(2), h_cav) + kron(h_qub, identity(n))
    assert np.allclose(h, expected, atol=1e-12)


def test_undisplaced_warns_on_small_cutoff():
    with pytest.warns(UserWarning, match="truncation"):
        build_hamiltonian_undisplaced(reference_params(n_bar=3.6, n_fock=8))


def test_every_builder_returns_hermitian():
    for n_bar in (0.0, 0.5, 3.31):
        p = reference_params(n_bar=n_bar, n_fock=24)
        for build in (
            build_hamiltonian_displaced,
            build_hamiltonian_undisplaced,
            build_effective_jc,
        ):
            h = build(p)
            assert np.max(np.abs(h - h.conj().T)) <= 1e-12
            assert h.shape == (2 * p.n_fock, 2 * p.n_fock)


def test_effective_jc_uncoupled_spectrum():
    p = SystemParams(
        chi=-2.0, kappa=1.0, omega_r_rabi=3.0, delta_c=-5.0,
        delta_q_prime=0.0, eps_d=0.0, gamma_down=0.0, gamma_up=0.0,
        gamma_phi=0.0, n_fock=4,
    )
    h = build_effective_jc(p)
    expected = sorted(
        -p.delta_c * m + s * 0.5 * p.omega_r_rabi
        for m in range(4)
        for s in (-1.0, 1.0)
    )
    assert np.allclose(np.sort(np.linalg.eigvalsh(h)), expected)


def test_effective_jc_conserves_excitation_number():
    p = reference_params(n_bar=3.31, n_fock=10)
    h = build_effective_jc(p)
    hs = HilbertSpace(p.n_fock)
    num = hs.cavity(creation(p.n_fock) @ annihilation(p.n_fock)) + hs.sp @ hs.sm
    assert np.max(np.abs(h @ num - num @ h)) <= 1e-12


def test_effective_jc_single_excitation_splitting():
    p = reference_params(kappa_mhz=0.2, n_bar=3.31, n_fock=8)
    h = build_effective_jc(p)
    fr = displacement(p.eps_d, p.delta_c, p.kappa)
    # single-excitation manifold: |e,0> and |g,1> in the qubit-major layout
    i, j = 1 * p.n_fock + 0, 0 * p.n_fock + 1
    block = np.array([[h[i, i], h[i, j]], [h[j, i], h[j, j]]])
    vals = np.linalg.eigvalsh(block)
    splitting = vals[1] - vals[0]
    assert splitting == pytest.approx(2.0 * abs(p.chi) * math.sqrt(fr.n_bar), rel=1e-12)
    assert splitting / TWO_PI == pytest.approx(2.402, abs=1e-3)


# ---------------------------------------------------------------------------
# collapse channels


def test_collapse_ops_structure_and_rates():
    p = reference_params(n_bar=1.0, thermal_qubit=True)
    ops = collapse_ops(p, frame="displaced")
    labels = [c.label for c in ops]
    assert labels == ["cavity", "qubit_down", "qubit_up", "dephasing"]
    rates = {c.label: c.rate for c in ops}
    assert rates["cavity"] == p.kappa
    assert rates["qubit_down"] == p.gamma_down
    assert rates["qubit_up"] == p.gamma_up
    assert rates["dephasing"] == 0.5 * p.gamma_phi
    # operators carry sqrt(rate)
    hs = HilbertSpace(p.n_fock)
    down = next(c for c in ops if c.label == "qubit_down")
    assert np.allclose(down.operator, math.sqrt(p.gamma_down) * hs.sm)
    cav = next(c for c in ops if c.label == "cavity")
    assert np.allclose(cav.operator, math.sqrt(p.kappa) * hs.a)


def test_collapse_ops_omit_zero_rates():
    p = reference_params(n_bar=0.5)
    bare = SystemParams(
        chi=p.chi, kappa=p.kappa, omega_r_rabi=p.omega_r_rabi,
        delta_c=p.delta_c, delta_q_prime=p.delta_q_prime, eps_d=p.eps_d,
        gamma_down=0.0, gamma_up=0.0, gamma_phi=0.0, n_fock=p.n_fock,
    )
    ops = collapse_ops(bare, frame="undisplaced")
    # kappa > 0 is a type invariant, so the cavity channel is always present
    assert [c.label for c in ops] == ["cavity"]


def test_collapse_ops_rejects_unknown_frame():
    with pytest.raises(ValueError):
        collapse_ops(reference_params(), frame="lab")


def test_thermal_rates_from_config():
    p = to_system_params(Config(thermal_qubit=True))
    assert p.gamma_down + p.gamma_up == pytest.approx(0.1, rel=1e-12)
    assert p.gamma_down == pytest.approx(0.0846, abs=5e-5)
    assert p.gamma_up == pytest.approx(0.0154, abs=5e-5)
    # two-level excited fraction in equilibrium
    assert p.gamma_up / (p.gamma_up + p.gamma_down) == pytest.approx(0.154, abs=1e-3)


def test_dephasing_rate_from_coherence_times():
    p = reference_params()
    assert p.gamma_phi == pytest.approx(1.0 / 10.6 - 1.0 / 20.0, rel=1e-12)
    assert p.gamma_phi == pytest.approx(0.0443, abs=5e-5)


# ---------------------------------------------------------------------------
# cutoff selection


def test_choose_fock_cutoff_reference_values():
    assert choose_fock_cutoff(reference_params(n_bar=0.0, n_fock=2), "displaced") == 8
    p = reference_params(n_bar=3.6, n_fock=2)
    assert choose_fock_cutoff(p, "undisplaced") == 22
    weak = choose_fock_cutoff(reference_params(n_bar=1.0, n_fock=2), "displaced")
    assert 8 <= weak <= 10


def test_cutoff_convergence_on_steady_state():
    from dressed_cool.dynamics import steady_state
    from dressed_cool.analysis import bloch_vector

    values = []
    for n_fock in (8, 16):
        p = reference_params(n_bar=1.0, n_fock=n_fock)
        rho = steady_state(build_hamiltonian_displaced(p), collapse_ops(p, "displaced"))
        values.append(bloch_vector(rho).x)
    assert abs(values[1] - values[0]) < 1e-3


# ---------------------------------------------------------------------------
# initial states


def test_turn_on_state_displaced_cancels_lab_field():
    p = reference_params(n_bar=2.0, n_fock=20)
    rho = turn_on_state(p, frame="displaced")
    validate_density_matrix(rho)
    a_bar = displacement(p.eps_d, p.delta_c, p.kappa).a_bar
    hs = HilbertSpace(p.n_fock)
    d_avg = expectation(hs.a, rho)
    # lab-frame cavity starts in vacuum: <a> = a_bar + <d> = 0
    assert abs(a_bar + d_avg) <= 1e-9


def test_turn_on_state_undisplaced_is_vacuum():
    p = reference_params(n_bar=2.0, n_fock=20)
    rho = turn_on_state(p, frame="undisplaced")
    validate_density_matrix(rho)
    hs = HilbertSpace(p.n_fock)
    assert expect_real(hs.a.conj().T @ hs.a, rho) == pytest.approx(0.0, abs=1e-12)


def test_turn_on_state_thermal_qubit_populations():
    p = to_system_params(Config(thermal_qubit=True, n_bar=1.0))
    rho = turn_on_state(p, frame="displaced")
    hs = HilbertSpace(p.n_fock)
    sz = expect_real(hs.sz, rho)
    excited = 0.5 * (1.0 - sz)
    assert excited == pytest.approx(p.gamma_up / (p.gamma_up + p.gamma_down), rel=1e-9)


def test_qubit_axis_states():
    p = reference_params(n_fock=6)
    hs = HilbertSpace(p.n_fock)
    for name, op, value in (
        ("ground", hs.sz, 1.0),
        ("excited", hs.sz, -1.0),
        ("plus", hs.sx, 1.0),
        ("minus", hs.sx, -1.0),
    ):
        rho = qubit_axis_state(p, name)
        validate_density_matrix(rho)
        assert expect_real(op, rho) == pytest.approx(value)
    with pytest.raises(ValueError):
        qubit_axis_state(p, "sideways")


# ---------------------------------------------------------------------------
# parameter validation


def test_system_params_validation():
    good = reference_params()
    with pytest.raises(ValueError):
        SystemParams(
            chi=good.chi, kappa=0.0, omega_r_rabi=good.omega_r_rabi,
            delta_c=good.delta_c, delta_q_prime=good.delta_q_prime,
            eps_d=good.eps_d, gamma_down=0.0, gamma_up=0.0, gamma_phi=0.0,
            n_fock=8,
        )
    with pytest.raises(ValueError):
        SystemParams(
            chi=good.chi, kappa=good.kappa, omega_r_rabi=good.omega_r_rabi,
            delta_c=good.delta_c, delta_q_prime=good.delta_q_prime,
            eps_d=-1.0, gamma_down=0.0, gamma_up=0.0, gamma_phi=0.0,
            n_fock=8,
        )
    with pytest.raises(ValueError):
        SystemParams(
            chi=good.chi, kappa=good.kappa, omega_r_rabi=good.omega_r_rabi,
            delta_c=good.delta_c, delta_q_prime=good.delta_q_prime,
            eps_d=good.eps_d, gamma_down=-0.1, gamma_up=0.0, gamma_phi=0.0,
            n_fock=8,
        )
    with pytest.raises(ValueError):
        SystemParams(
            chi=good.chi, kappa=good.kappa, omega_r_rabi=good.omega_r_rabi,
            delta_c=good.delta_c, delta_q_prime=good.delta_q_prime,
            eps_d=good.eps_d, gamma_down=0.0, gamma_up=0.0, gamma_phi=0.0,
            n_fock=1,
        )


def test_n_bar_of_matches_displacement():
    p = reference_params(n_bar=2.5)
    assert n_bar_of(p) == pytest.approx(2.5, rel=1e-12)
