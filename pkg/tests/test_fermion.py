import numpy as np
import pytest
from scipy.linalg import expm

from models.fermion import FermionModel, FockSpace, GateSchedule, ManyBodyOperator
from utils.errors import ConfigError, DomainError
from utils.fermion import (
    anticommutator_check,
    apply_schedule,
    build_hamiltonian,
    cz,
    cz_printed,
    exact_evolve,
    fermi_hubbard,
    free_fermion_ground_energy,
    fswap,
    fswap_network,
    fswap_printed,
    load_model_file,
    molecular_hamiltonian,
    mode_operators,
    multiband_hubbard,
    neel_occupation,
    number_operator,
    periodic_anderson,
    phase_gate,
    reorder_state,
    sector_ground_energy,
    sector_spectrum,
    spin_encoded_model,
    spinful_encoding_check,
    trotter_error_scaling,
    trotter_evolve,
    trotter_schedule,
    u_int,
    u_tun,
    vqe_minimize,
    z_gate,
)


@pytest.mark.parametrize("L", range(1, 7))
def test_anticommutation_relations(L):
    assert anticommutator_check(FockSpace(L)) < 1e-12


def test_single_mode_lowering_operator():
    ops = mode_operators(FockSpace(1))
    np.testing.assert_array_equal(ops["c"][0].toarray(), [[0, 1], [0, 0]])
    assert set(np.unique(ops["n"][0].diagonal().real)) == {0.0, 1.0}


def test_mode_limit():
    with pytest.raises(DomainError):
        FockSpace(15)
    with pytest.raises(DomainError):
        mode_operators(15)


def test_spinful_orderings():
    interleaved = FockSpace.spinful(2)
    block = FockSpace.spinful(2, ordering="spin-block")
    assert interleaved.labels == [(0, "up"), (0, "down"), (1, "up"), (1, "down")]
    assert block.labels == [(0, "up"), (1, "up"), (0, "down"), (1, "down")]
    with pytest.raises(DomainError):
        FockSpace.spinful(2, ordering="diagonal")


def test_tunneling_gate_matches_matrix_exponential():
    space = FockSpace(3)
    ops = mode_operators(space)
    theta1, theta2, theta3 = 0.7, -1.1, 0.4
    hop = np.exp(-1j * theta2) * (ops["cdag"][0] @ ops["c"][2])
    generator = 0.5 * theta1 * (hop + hop.getH()) + 0.5 * theta3 * (ops["n"][0] - ops["n"][2])
    np.testing.assert_allclose(u_tun(space, 0, 2, theta1, theta2, theta3).to_dense(),
                               expm(-1j * generator.toarray()), atol=1e-12)


def test_tunneling_gate_basics():
    space = FockSpace(3)
    np.testing.assert_allclose(u_tun(space, 0, 1, 0.0).to_dense(), np.eye(8), atol=1e-15)
    gate = u_tun(space, 0, 1, 1.3, 0.2, -0.5)
    assert gate.commutator_norm(number_operator(space)) < 1e-12
    with pytest.raises(DomainError):
        u_tun(space, 1, 1, 0.5)


def test_interaction_gate_is_diagonal():
    space = FockSpace(3)
    gate = u_int(space, 0, 2, 0.9)
    dense = gate.to_dense()
    np.testing.assert_allclose(dense, np.diag(np.diag(dense)))
    ops = mode_operators(space)
    for n in ops["n"]:
        assert gate.commutator_norm(n) < 1e-14
    np.testing.assert_allclose(u_int(space, 0, 1, 0.0).to_dense(), np.eye(8))


def test_fswap_matrix():
    expected = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]])
    gate = fswap(FockSpace(2), 0, 1)
    np.testing.assert_allclose(gate.to_dense(), expected, atol=1e-12)
    np.testing.assert_allclose((gate @ gate).to_dense(), np.eye(4), atol=1e-12)


def test_printed_fswap_differs_by_number_phase(caplog):
    space = FockSpace(2)
    printed = fswap_printed(space, 0, 1)
    assert "up to" in caplog.text
    corrected = fswap(space, 0, 1) @ phase_gate(space, 0, -0.75 * np.pi) @ phase_gate(space, 1, -0.75 * np.pi)
    np.testing.assert_allclose(printed.to_dense(), corrected.to_dense(), atol=1e-12)


def test_controlled_z_conventions():
    space = FockSpace(2)
    gate = cz(space, 0, 1)
    np.testing.assert_allclose(gate.to_dense().diagonal(), [1, 1, 1, -1])
    np.testing.assert_allclose((gate @ gate).to_dense(), np.eye(4), atol=1e-15)
    assert cz_printed(space, 0, 1).to_dense()[3, 3] == pytest.approx(-1j)


def test_phase_gate_powers():
    space = FockSpace(1)
    z = z_gate(space, 0).to_dense()
    np.testing.assert_allclose(np.linalg.matrix_power(z, 4), np.diag([1, -1]), atol=1e-12)
    np.testing.assert_allclose(np.linalg.matrix_power(z, 8), np.eye(2), atol=1e-12)


def test_unitarity_is_enforced():
    with pytest.raises(DomainError):
        ManyBodyOperator(np.array([[1.0, 1.0], [0.0, 1.0]]), unitary=True)


def test_dimer_single_particle_energies():
    model = fermi_hubbard(2, t=1.0, U=0.0)
    spectrum = sector_spectrum(build_hamiltonian(model), model.space, 1)
    np.testing.assert_allclose(spectrum, [-1, -1, 1, 1], atol=1e-12)


def test_free_fermion_limit():
    model = fermi_hubbard(4, t=1.0, U=0.0)
    energy = sector_ground_energy(build_hamiltonian(model), model.space, 4)
    assert energy == pytest.approx(-2 * np.sqrt(5), abs=1e-10)
    assert energy == pytest.approx(free_fermion_ground_energy(model, 4), abs=1e-10)


def test_hubbard_chain_dense_and_lanczos_agree():
    model = fermi_hubbard(4, t=1.0, U=4.0)
    hamiltonian = build_hamiltonian(model)
    dense = sector_ground_energy(hamiltonian, model.space, 4)
    lanczos = sector_ground_energy(hamiltonian, model.space, 4, method="lanczos")
    assert dense == pytest.approx(lanczos, abs=1e-9)
    assert -2 * np.sqrt(5) < dense < 0


def test_next_nearest_neighbor_terms():
    model = fermi_hubbard(4, t=1.0, U=2.0, t_prime=0.3)
    space = model.space
    assert model.hopping[(space.index((0, "up")), space.index((2, "up")))] == pytest.approx(-0.3)
    assert build_hamiltonian(model).hermiticity_error() < 1e-12


def test_decoupled_anderson_model():
    model = periodic_anderson(2, t=1.0, V=0.0, eps_f=0.3, U=5.0)
    spectrum = sector_spectrum(build_hamiltonian(model), model.space, 1)
    np.testing.assert_allclose(spectrum, [-1, -1, 0.3, 0.3, 0.3, 0.3, 1, 1], atol=1e-12)


def test_multiband_model_is_hermitian():
    model = multiband_hubbard(2, hopping=[[1.0, 0.2], [0.2, 0.5]], interaction=[[3.0, 1.0], [1.0, 2.0]],
                              hybridization=[[0.0, 0.1], [0.1, 0.0]], mu=0.5)
    assert model.space.L == 8
    assert build_hamiltonian(model).hermiticity_error() < 1e-12
    with pytest.raises(DomainError):
        multiband_hubbard(2, hopping=[[1.0]], interaction=[[1.0, 0.0], [0.0, 1.0]])


def test_molecular_two_body_density_term():
    one_body = np.array([[0.0, -1.0], [-1.0, 0.0]])
    two_body = np.zeros((2, 2, 2, 2))
    two_body[0, 1, 1, 0] = 2.5
    molecular = build_hamiltonian(molecular_hamiltonian(one_body, two_body))
    direct = build_hamiltonian(FermionModel(FockSpace(2), hopping={(0, 1): -1.0}, density={(0, 1): 2.5}))
    np.testing.assert_allclose(molecular.to_dense(), direct.to_dense(), atol=1e-14)


def test_non_hermitian_coefficients_rejected():
    with pytest.raises(DomainError):
        molecular_hamiltonian([[0.0, 1.0], [0.5, 0.0]])
    two_body = np.zeros((3, 3, 3, 3))
    two_body[0, 1, 2, 0] = 1.0
    with pytest.raises(DomainError):
        build_hamiltonian(molecular_hamiltonian(np.zeros((3, 3)), two_body))


def test_trotter_error_is_first_order():
    model = fermi_hubbard(4, t=1.0, U=4.0)
    frame, fit = trotter_error_scaling(model, tau=2.0)
    assert np.all(np.diff(frame["err_norm"]) < 0)
    assert fit["slope"] == pytest.approx(-1.0, abs=0.1)


def test_trotter_conserves_particle_number():
    model = fermi_hubbard(4, t=1.0, U=4.0)
    result = trotter_evolve(model, 2.0, 16)
    np.testing.assert_allclose(result["frame"]["N_particles"], 4.0, atol=1e-10)
    assert result["frame"]["err_norm"].iloc[-1] > 0


def test_single_layer_trotter_is_exact():
    model = fermi_hubbard(2, t=1.0, U=0.0)
    result = trotter_evolve(model, 1.5, 3, initial=[(0, "up"), (0, "down")])
    assert result["counts"]["layers_per_step"] == 1
    assert result["frame"]["err_norm"].max() < 1e-12


@pytest.mark.parametrize("sites", [3, 4, 5])
def test_gate_count_linear_rearrangements_constant(sites):
    schedule = trotter_schedule(fermi_hubbard(sites, t=1.0, U=4.0), 0.1)
    assert schedule.gate_count == 3 * sites - 2
    assert schedule.rearrangements == 3


def test_trotter_phase_convention():
    space = FockSpace(2)
    model = FermionModel(space, hopping={(0, 1): 0.8 * np.exp(0.6j)})
    schedule = trotter_schedule(model, 0.05)
    kind, modes, params = schedule.layers[0][0]
    assert (kind, modes) == ("tun", (0, 1))
    assert params == pytest.approx((0.08, -0.6, 0.0))


def test_overlapping_layer_rejected():
    with pytest.raises(DomainError):
        GateSchedule([[("tun", (0, 1), (0.1, 0, 0)), ("int", (1, 2), (0.2,))]])


def test_fswap_network_reorders_modes():
    rng = np.random.default_rng(3)
    source = FockSpace(4)
    state = rng.normal(size=16) + 1j * rng.normal(size=16)
    state /= np.linalg.norm(state)
    order = [2, 0, 3, 1]
    target = FockSpace([source.labels[m] for m in order])
    swapped = apply_schedule(source, fswap_network(order), state)
    np.testing.assert_allclose(swapped, reorder_state(state, source, target), atol=1e-12)


def test_spin_encoding_matches_spinful_evolution():
    assert spinful_encoding_check(sites=4, t=1.0, U=4.0, tau=1.0)["max_difference"] < 1e-10
    assert spinful_encoding_check(sites=3, t=0.7, U=2.0, tau=2.0)["max_difference"] < 1e-10


def test_neel_state_changes_sign_under_spin_encoding():
    spinful = fermi_hubbard(4, t=1.0, U=4.0)
    encoded = spin_encoded_model(spinful)
    occupied = neel_occupation(spinful.space)
    moved = reorder_state(spinful.space.basis_state(occupied), spinful.space, encoded.space)
    np.testing.assert_allclose(moved, -encoded.space.basis_state(occupied), atol=1e-15)


def test_neel_state():
    space = FockSpace.spinful(4)
    assert neel_occupation(space) == [(0, "up"), (1, "down"), (2, "up"), (3, "down")]


def test_exact_evolution_preserves_norm():
    model = fermi_hubbard(3, t=1.0, U=2.0)
    states = exact_evolve(build_hamiltonian(model), model.space.basis_state(neel_occupation(model.space)), 1.0,
                          points=4)
    np.testing.assert_allclose(np.linalg.norm(states, axis=1), 1.0, atol=1e-12)


def test_model_file(tmp_path):
    path = tmp_path / "chain.model"
    path.write_text("# three sites\nmodel = fh\nsites = 3\nt = 1\nU = 2\nedge 0 1\nedge 1 2 0.5\n")
    model = load_model_file(path)
    space = model.space
    assert model.hopping[(space.index((1, "up")), space.index((2, "up")))] == pytest.approx(-0.5)
    assert model.density[(space.index((0, "up")), space.index((0, "down")))] == pytest.approx(2.0)

    path.write_text("model = fh\nsites = 3\nbond 0 1\n")
    with pytest.raises(ConfigError):
        load_model_file(path)
    with pytest.raises(ConfigError):
        load_model_file(tmp_path / "missing.model")


def test_zero_layer_ansatz_on_diagonal_hamiltonian():
    model = molecular_hamiltonian(np.diag([0.4, -0.3, 0.2, -0.1]))
    result = vqe_minimize(model, layers=0)
    assert result["energy"] == pytest.approx(-0.4)
    assert result["gap"] == pytest.approx(0.0, abs=1e-12)


def test_exhausted_budget_is_flagged_not_raised(caplog):
    model = fermi_hubbard(2, t=1.0, U=2.0)
    result = vqe_minimize(model, layers=1, restarts=2, max_evaluations=5, seed=0)
    assert result["stagnated"]
    assert result["bound_ok"]
    assert result["gap"] >= -1e-9
    assert "evaluation budget" in caplog.text


@pytest.mark.slow
def test_vqe_hubbard_dimer():
    model = fermi_hubbard(2, t=1.0, U=2.0)
    result = vqe_minimize(model, layers=2, initial=[(0, "up"), (1, "down")], seed=0)
    assert result["exact"] == pytest.approx(1 - np.sqrt(5), abs=1e-10)
    assert result["gap"] < 1e-3
    assert result["bound_ok"]
    assert list(result["trace"].columns) == ["restart", "evaluation", "energy", "best"]


@pytest.mark.slow
def test_vqe_free_fermions():
    rng = np.random.default_rng(7)
    raw = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    model = molecular_hamiltonian(0.5 * (raw + raw.conj().T))
    result = vqe_minimize(model, layers=1, seed=1)
    assert result["exact"] == pytest.approx(free_fermion_ground_energy(model, 1), abs=1e-10)
    assert result["gap"] < 1e-6
    assert result["bound_ok"]
