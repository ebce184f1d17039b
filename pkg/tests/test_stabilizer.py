import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qorigami import anyons
from qorigami import stabilizer as stab
from qorigami.stabilizer import (
    PauliOp,
    QubitPermutation,
    StabilizerError,
    build_bilayer_genon_code,
    build_toric_torus,
    diagonal_fold_map,
    exact_z_distance,
    folded_view,
    genon_double_loop,
    geometric_permutation,
    gf2_in_span,
    gf2_rank,
    logical_action,
    min_logical_weight_upper_bound,
    protocol_action,
    symplectic_from_unitary,
)


def _target_hh_swap() -> np.ndarray:
    model = anyons.builtin_model("toric_code")
    return symplectic_from_unitary(anyons.rep_on_torus(model, "Ra S"))


# -- GF(2) and Pauli basics ----------------------------------------------


def test_gf2_rank_and_span():
    m = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=np.uint8)
    assert gf2_rank(m) == 2
    assert gf2_in_span(m, np.array([1, 0, 1], dtype=np.uint8))
    assert not gf2_in_span(m, np.array([1, 1, 1], dtype=np.uint8))


def test_pauli_string_roundtrip():
    op = PauliOp.from_string("XIZY")
    assert op.to_string() == "XIZY"
    assert op.weight() == 3


def test_pauli_products():
    x = PauliOp.from_string("X")
    z = PauliOp.from_string("Z")
    y = PauliOp.from_string("Y")
    assert not x.commutes_with(z)
    xz = x * z
    assert xz.to_string() == "Y"
    # Y = i XZ, so XZ carries phase i^3 relative to Y's i^1.
    assert (x * z).phase != y.phase or (x * z) == y
    sq = xz * xz
    assert sq.to_string() == "I"
    assert sq.phase == 2  # XZXZ = -1


_bits = st.lists(st.integers(0, 1), min_size=4, max_size=4)


@given(_bits, _bits, _bits, _bits)
def test_commutation_is_symplectic_form(x1, z1, x2, z2):
    a = PauliOp(np.array(x1), np.array(z1))
    b = PauliOp(np.array(x2), np.array(z2))
    form = (np.dot(x1, z2) + np.dot(z1, x2)) % 2
    assert a.commutes_with(b) == (form == 0)


def test_permutation_validation():
    with pytest.raises(StabilizerError):
        QubitPermutation(np.array([0, 0, 1]))


# -- toric torus ----------------------------------------------------------


@pytest.mark.parametrize("L", [2, 3, 4])
def test_torus_parameters(L):
    code = build_toric_torus(L)
    assert code.n == 2 * L * L
    assert code.k == 2
    (x1, z1), (x2, z2) = code.logical_pairs
    assert not x1.commutes_with(z1)
    assert not x2.commutes_with(z2)
    assert x1.commutes_with(z2) and x2.commutes_with(z1)


def test_torus_rejects_small_lattice():
    with pytest.raises(StabilizerError):
        build_toric_torus(1)


@pytest.mark.parametrize("L", [2, 3, 4])
@pytest.mark.parametrize("move", ["reflect_diagonal",
                                  "rotate_quarter_about_vertex"])
def test_torus_oracle_matches_anyon_rep(L, move):
    code = build_toric_torus(L)
    act = logical_action(code, geometric_permutation(code, move))
    assert np.array_equal(act["symplectic"], _target_hh_swap())


def test_reflect_vertical_is_logically_trivial():
    code = build_toric_torus(4)
    act = logical_action(code, geometric_permutation(code, "reflect_vertical"))
    assert np.array_equal(act["symplectic"], np.eye(4, dtype=np.uint8))


def test_reflection_action_is_involutive():
    code = build_toric_torus(3)
    p = geometric_permutation(code, "reflect_diagonal")
    act = logical_action(code, p.compose(p))
    assert np.array_equal(act["symplectic"], np.eye(4, dtype=np.uint8))


def test_quarter_rotation_has_order_four():
    code = build_toric_torus(4)
    p = geometric_permutation(code, "rotate_quarter_about_vertex")
    p4 = p.compose(p).compose(p).compose(p)
    act = logical_action(code, p4)
    assert np.array_equal(act["symplectic"], np.eye(4, dtype=np.uint8))


def test_plaquette_rotation_is_also_an_automorphism():
    # A quarter turn about a face center still maps vertices to vertices on
    # the square lattice, so it permutes stars among themselves.
    code = build_toric_torus(4)
    act = logical_action(
        code, geometric_permutation(code, "rotate_quarter_about_plaquette"))
    assert np.array_equal(act["symplectic"], _target_hh_swap())


def test_half_translation_swaps_charge_types():
    code = build_toric_torus(4)
    p = geometric_permutation(code, "half_translation")
    assert p.tags and all(t == "H" for t in p.tags.values())
    act = logical_action(code, p)
    want = np.zeros((4, 4), dtype=np.uint8)
    want[0, 2] = want[2, 0] = want[1, 3] = want[3, 1] = 1
    assert np.array_equal(act["symplectic"], want)


def test_action_is_a_homomorphism_on_moves():
    code = build_toric_torus(3)
    p1 = geometric_permutation(code, "reflect_diagonal")
    p2 = geometric_permutation(code, "reflect_vertical")
    a12 = logical_action(code, p1.compose(p2))["symplectic"]
    a1 = logical_action(code, p1)["symplectic"]
    a2 = logical_action(code, p2)["symplectic"]
    assert np.array_equal(a12, (a1 @ a2) % 2)


def test_unknown_move_rejected():
    code = build_toric_torus(2)
    with pytest.raises(StabilizerError):
        geometric_permutation(code, "reflect_everything")


# -- bilayer genon code ---------------------------------------------------


def test_genon_code_parameters():
    code = build_bilayer_genon_code(6)
    assert code.n == 4 * 6 * 7
    assert code.k == 2
    (x1, z1), (x2, z2) = code.logical_pairs
    assert not x1.commutes_with(z1)
    assert not x2.commutes_with(z2)


def test_genon_cut_validation():
    with pytest.raises(StabilizerError):
        build_bilayer_genon_code(6, cuts=((2, 2, 4), (2, 2, 4)))
    with pytest.raises(StabilizerError):
        build_bilayer_genon_code(6, cuts=((0, 2, 4), (4, 2, 4)))
    with pytest.raises(StabilizerError):
        build_bilayer_genon_code(6, cuts=((2, 0, 4), (4, 0, 4)))
    with pytest.raises(StabilizerError):
        build_bilayer_genon_code(6, cuts=((2, 2, 3), (4, 2, 3)))


def test_double_genon_loop_is_a_stabilizer():
    code = build_bilayer_genon_code(6)
    for cut_index in (0, 1):
        for endpoint in (0, 1):
            loop = genon_double_loop(code, cut_index, endpoint)
            assert loop.weight() == 8
            assert code.contains(loop)


def test_merged_endpoint_stars_have_weight_eight():
    code = build_bilayer_genon_code(6)
    weights = sorted(g.weight() for g in code.generators)
    assert weights.count(8) >= 4


def test_layer_swap_trivial_on_logicals():
    code = build_bilayer_genon_code(6)
    act = protocol_action(code, ["layer_swap"])
    assert np.array_equal(act["symplectic"], np.eye(4, dtype=np.uint8))


def test_mirror_swap_protocol_gives_ras():
    code = build_bilayer_genon_code(6)
    act = protocol_action(code, ["reflect_antidiagonal", "patch_layer_swap"])
    assert np.array_equal(act["symplectic"], _target_hh_swap())


def test_mirror_swap_mirror_protocol_gives_s():
    code = build_bilayer_genon_code(6)
    act = protocol_action(
        code, ["reflect_antidiagonal", "patch_layer_swap", "reflect_vertical"])
    assert np.array_equal(act["symplectic"], _target_hh_swap())


def test_mirror_alone_moves_the_cuts():
    code = build_bilayer_genon_code(6)
    with pytest.raises(StabilizerError):
        protocol_action(code, ["reflect_antidiagonal"])


def test_empty_protocol_is_identity():
    code = build_bilayer_genon_code(6)
    act = protocol_action(code, [])
    assert np.array_equal(act["symplectic"], np.eye(4, dtype=np.uint8))


def test_k_is_invariant_under_automorphisms():
    code = build_bilayer_genon_code(6)
    for move in ("layer_swap", "reflect_vertical"):
        geometric_permutation(code, move)  # raises if not an automorphism
    assert code.k == 2


# -- folded views ---------------------------------------------------------


def test_diagonal_fold_certificate():
    code = build_toric_torus(4)
    fmap = diagonal_fold_map(code)
    perm = geometric_permutation(code, "reflect_diagonal")
    cert = folded_view(code, fmap, perm)
    assert cert["transversal"]
    for site_perm in cert["per_site"].values():
        assert site_perm == {1: 2, 2: 1}


def test_vertical_reflection_is_not_transversal_for_diagonal_fold():
    code = build_toric_torus(4)
    fmap = diagonal_fold_map(code)
    perm = geometric_permutation(code, "reflect_vertical")
    with pytest.raises(StabilizerError, match="not transversal"):
        folded_view(code, fmap, perm)


def test_identity_is_transversal():
    code = build_toric_torus(2)
    fmap = diagonal_fold_map(code)
    ident = QubitPermutation(np.arange(code.n), name="identity")
    cert = folded_view(code, fmap, ident)
    assert cert["transversal"]


# -- distances ------------------------------------------------------------


@pytest.mark.parametrize("L", [2, 3])
def test_torus_distance_is_L(L):
    assert exact_z_distance(build_toric_torus(L)) == L


def test_distance_bound_grows_with_cut_separation():
    near = build_bilayer_genon_code(10, cuts=((4, 2, 8), (5, 2, 8)))
    far = build_bilayer_genon_code(10, cuts=((3, 2, 8), (6, 2, 8)))
    ub_near = min_logical_weight_upper_bound(near, seed=3, sweeps=400)
    ub_far = min_logical_weight_upper_bound(far, seed=3, sweeps=400)
    assert ub_near < ub_far


# -- exports --------------------------------------------------------------


def test_text_export_shape():
    code = build_toric_torus(2)
    lines = code.export_text().strip().split("\n")
    assert len(lines) == len(code.generators)
    assert all(len(line) == code.n for line in lines)
    assert set("".join(lines)) <= set("IXYZ")


def test_symplectic_json_export():
    import json

    code = build_toric_torus(2)
    act = logical_action(code, geometric_permutation(code, "reflect_diagonal"))
    doc = json.loads(stab.export_symplectic_json(act))
    assert doc["k"] == 2
    assert np.array_equal(np.array(doc["symplectic"]), act["symplectic"])


def test_symplectic_from_unitary_rejects_non_clifford():
    rng = np.random.default_rng(0)
    mat = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q, _ = np.linalg.qr(mat)
    with pytest.raises(StabilizerError):
        symplectic_from_unitary(q)
