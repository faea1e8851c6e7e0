"""Embedding tests: definitions, norms, oracle circuits, invariances."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qser.embed import (
    AmplitudeEmbedding,
    AngleEmbedding,
    IQPEmbedding,
    amplitude_embed,
    angle_embed,
    embed,
    embedding_ops,
    iqp_embed,
)
from qser.errors import ConfigError, EmbeddingError
from qser.qstate import CircuitSpec, GateOp, dense_unitary, new_zero_state


def test_angle_zero_features_is_zero_state():
    for axis in ("X", "Y", "Z"):
        state = angle_embed(np.zeros(3), axis)
        assert np.allclose(state.amps, new_zero_state(3).amps, atol=1e-12)


def test_angle_pi_on_x_axis_flips():
    state = angle_embed([np.pi], "X")
    # RX(pi)|0> = -i|1>: probabilities [0, 1]
    assert np.allclose(np.abs(state.amps) ** 2, [0, 1], atol=1e-12)
    assert np.allclose(state.amps[1], -1j)


def test_angle_embed_matches_oracle_circuit():
    features = [np.pi / 2, np.pi / 3]
    state = angle_embed(features, "Y")
    oracle = dense_unitary(CircuitSpec(2, (
        GateOp("RY", (0,), (features[0],)),
        GateOp("RY", (1,), (features[1],)),
    )))
    assert np.max(np.abs(state.amps - oracle[:, 0])) < 1e-12


def test_angle_embed_rejects_bad_axis_and_shape():
    with pytest.raises(ConfigError):
        angle_embed([0.0], "Q")
    with pytest.raises(EmbeddingError):
        angle_embed(np.zeros((2, 2)))


def test_amplitude_basis_vector():
    state = amplitude_embed([1, 0, 0, 0], 2)
    assert np.allclose(state.amps, [1, 0, 0, 0])


def test_amplitude_uniform():
    state = amplitude_embed([1, 1, 1, 1], 2)
    assert np.allclose(state.amps, [0.5, 0.5, 0.5, 0.5])


def test_amplitude_three_four_five():
    state = amplitude_embed([3, 4], 1)
    assert np.allclose(state.amps, [0.6, 0.8])


def test_amplitude_pads_with_trailing_zeros():
    state = amplitude_embed([2.0], 2)
    assert np.allclose(state.amps, [1, 0, 0, 0])


def test_amplitude_rejects_all_zero():
    with pytest.raises(EmbeddingError):
        amplitude_embed([0.0, 0.0], 1)


@given(scale=st.floats(min_value=1e-6, max_value=1e6),
       seed=st.integers(min_value=0, max_value=2**31))
@settings(max_examples=40, deadline=None)
def test_amplitude_scale_invariance(scale, seed):
    features = np.random.default_rng(seed).normal(size=7) + 0.01
    base = amplitude_embed(features, 3).amps
    scaled = amplitude_embed(scale * features, 3).amps
    assert np.max(np.abs(base - scaled)) < 1e-12


def test_iqp_zero_features_is_uniform_for_odd_repeats():
    # with zero phases each repeat reduces to an H wall; odd repeats leave a
    # net H^n (uniform), even repeats cancel back to |0...0>
    for repeats in (1, 3):
        state = iqp_embed(np.zeros(3), repeats)
        assert np.allclose(np.abs(state.amps) ** 2, np.full(8, 1 / 8), atol=1e-12)
    state = iqp_embed(np.zeros(3), 2)
    assert np.allclose(np.abs(state.amps) ** 2, [1, 0, 0, 0, 0, 0, 0, 0], atol=1e-12)


def test_iqp_single_qubit_probabilities_stay_half():
    # diagonal phases after H cannot change |amp|^2 on one qubit
    state = iqp_embed([0.77], 1)
    assert np.allclose(np.abs(state.amps) ** 2, [0.5, 0.5], atol=1e-12)


def test_iqp_matches_expanded_oracle_circuit():
    f = [0.7, 1.1]
    state = iqp_embed(f, repeats=2)
    layer = (
        GateOp("H", (0,)), GateOp("H", (1,)),
        GateOp("RZ", (0,), (f[0],)), GateOp("RZ", (1,), (f[1],)),
        GateOp("CPHASE", (0, 1), (f[0] * f[1],)),
    )
    oracle = dense_unitary(CircuitSpec(2, layer + layer))
    assert np.max(np.abs(state.amps - oracle[:, 0])) < 1e-12


def test_iqp_rejects_bad_repeats():
    with pytest.raises(ConfigError):
        iqp_embed([0.1], 0)


def test_all_embeddings_produce_unit_norm(rng):
    kinds = [AngleEmbedding("X"), AngleEmbedding("Y"), AngleEmbedding("Z"),
             AmplitudeEmbedding(), IQPEmbedding(1), IQPEmbedding(2)]
    for kind in kinds:
        for _ in range(20):
            n = int(rng.integers(1, 5))
            width = 2**n if isinstance(kind, AmplitudeEmbedding) else n
            state = embed(rng.normal(size=width), kind, n)
            assert abs(state.norm() - 1.0) < 1e-10, kind


def test_embed_validates_width():
    with pytest.raises(EmbeddingError):
        embed(np.zeros(3), AngleEmbedding(), 4)
    with pytest.raises(EmbeddingError):
        embed(np.ones(3), AmplitudeEmbedding(), 2)


def test_embedding_ops_angle_sensitivities(rng):
    features = rng.normal(size=3)
    state, gates, sens = embedding_ops(features, AngleEmbedding("X"), 3)
    assert np.allclose(state.amps, new_zero_state(3).amps)
    assert [g.kind for g in gates] == ["RX"] * 3
    assert [fg.sensitivities for fg in sens] == [((0, 1.0),), ((1, 1.0),), ((2, 1.0),)]


def test_embedding_ops_iqp_pair_coefficients():
    features = np.array([2.0, 3.0])
    _, gates, sens = embedding_ops(features, IQPEmbedding(1), 2)
    assert [g.kind for g in gates] == ["H", "H", "RZ", "RZ", "CPHASE"]
    pair = sens[-1]
    assert gates[pair.gate_index].kind == "CPHASE"
    # angle = f0 * f1 = 6, with d/df0 = f1 and d/df1 = f0
    assert gates[pair.gate_index].params[0] == pytest.approx(6.0)
    assert pair.sensitivities == ((0, 3.0), (1, 2.0))


def test_embedding_ops_amplitude_has_no_gates(rng):
    features = rng.normal(size=4)
    state, gates, sens = embedding_ops(features, AmplitudeEmbedding(), 2)
    assert gates == [] and sens is None
    assert abs(state.norm() - 1.0) < 1e-12
