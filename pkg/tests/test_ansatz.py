import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llmqas.ansatz import (
    BLOCK_ROTATIONS,
    AnsatzSpec,
    Entanglement,
    TwoLocalConfig,
    build_circuit,
    entanglement_pairs,
    parse_proposal,
    render_proposal,
    rotations_per_qubit,
)
from llmqas.errors import (
    InvalidBlockIndex,
    MalformedTwoLocalConfig,
    MissingTwoLocalConfig,
    NoAnsatzList,
    ProposalError,
)
from llmqas.statevector import Gate, apply_circuit, circuit_param_count, probabilities, zero_state

from oracles import circuit_unitary


def circular_by_enumeration(n):
    # every cyclic neighbour pair, wrap pair first
    pairs = {(i, (i + 1) % n) for i in range(n)}
    wrap = (n - 1, 0)
    return [wrap] + sorted(pairs - {wrap})


class TestEntanglementPairs:
    def test_linear(self):
        assert entanglement_pairs(Entanglement.LINEAR, 4) == [(0, 1), (1, 2), (2, 3)]

    def test_full(self):
        assert entanglement_pairs(Entanglement.FULL, 3) == [(0, 1), (0, 2), (1, 2)]

    def test_pairwise(self):
        assert entanglement_pairs(Entanglement.PAIRWISE, 4) == [(0, 1), (2, 3), (1, 2)]

    def test_reverse_linear(self):
        assert entanglement_pairs("reverse_linear", 4) == [(2, 3), (1, 2), (0, 1)]

    def test_circular(self):
        assert entanglement_pairs(Entanglement.CIRCULAR, 3) == [(2, 0), (0, 1), (1, 2)]

    @pytest.mark.parametrize("n", range(3, 9))
    def test_circular_matches_enumeration(self, n):
        assert entanglement_pairs("circular", n) == circular_by_enumeration(n)

    def test_sca_block_zero_is_circular(self):
        assert entanglement_pairs("sca", 5, 0) == entanglement_pairs("circular", 5)

    def test_sca_block_one(self):
        # circular list shifted by one, then control/target swapped
        assert entanglement_pairs(Entanglement.SCA, 3, 1) == [(2, 1), (0, 2), (1, 0)]

    def test_sca_block_two_not_swapped(self):
        assert entanglement_pairs("sca", 3, 2) == [(0, 1), (1, 2), (2, 0)]

    @pytest.mark.parametrize("n", range(2, 9))
    def test_closed_form_counts(self, n):
        assert len(entanglement_pairs("full", n)) == n * (n - 1) // 2
        for s in ("linear", "reverse_linear", "pairwise"):
            assert len(entanglement_pairs(s, n)) == n - 1
        if n >= 3:
            assert len(entanglement_pairs("circular", n)) == n
            for b in range(4):
                assert len(entanglement_pairs("sca", n, b)) == n

    def test_single_qubit_has_no_pairs(self):
        for s in Entanglement:
            assert entanglement_pairs(s, 1) == []

    @pytest.mark.parametrize("n", range(2, 9))
    def test_pairs_are_valid(self, n):
        for s in Entanglement:
            for b in range(3):
                pairs = entanglement_pairs(s, n, b)
                assert all(0 <= c < n and 0 <= t < n and c != t for c, t in pairs)
                assert len(set(map(frozenset, pairs))) == len(pairs)

    def test_case_insensitive_names(self):
        assert Entanglement.parse("Circular") is Entanglement.CIRCULAR
        assert Entanglement.parse("ReverseLinear") is Entanglement.REVERSE_LINEAR
        with pytest.raises(MalformedTwoLocalConfig):
            Entanglement.parse("ring")


class TestBuildCircuit:
    def test_cz_only(self):
        c = build_circuit(AnsatzSpec((4,)), 3)
        assert c.gates == (Gate("CZ", (0, 1)), Gate("CZ", (1, 2)))
        assert c.n_params == 0

    def test_rx_block(self):
        c = build_circuit(AnsatzSpec((1,)), 2)
        assert c.gates == (Gate("RX", (0,), 0), Gate("RX", (1,), 1), Gate("CZ", (0, 1)))
        assert c.n_params == 2

    def test_missing_config(self):
        with pytest.raises(MissingTwoLocalConfig):
            build_circuit([5], 2)

    def test_raw_list_accepted(self):
        assert build_circuit([2, 4], 3) == build_circuit(AnsatzSpec((2, 4)), 3)

    def test_unknown_tag(self):
        with pytest.raises(InvalidBlockIndex):
            build_circuit([6], 2)

    def test_twolocal_layers(self):
        spec = AnsatzSpec((5,), {0: TwoLocalConfig(("RY", "RZ"), "full")})
        c = build_circuit(spec, 3)
        kinds = [g.kind for g in c.gates]
        assert kinds == ["RY"] * 3 + ["RZ"] * 3 + ["CZ"] * 3
        assert [g.param_slot for g in c.gates[:6]] == list(range(6))

    def test_param_count_formula(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(1, 7))
            blocks = tuple(int(b) for b in rng.integers(1, 6, size=rng.integers(1, 7)))
            configs = {}
            for pos, b in enumerate(blocks):
                if b == 5:
                    k = int(rng.integers(1, 4))
                    rots = tuple(rng.choice(["RX", "RY", "RZ"], size=k, replace=False))
                    configs[pos] = TwoLocalConfig(rots, rng.choice([e.value for e in Entanglement]))
            spec = AnsatzSpec(blocks, configs)
            expected = sum(rotations_per_qubit(b, configs.get(i)) * n for i, b in enumerate(blocks))
            assert circuit_param_count(build_circuit(spec, n)) == expected

    def test_rotation_counts(self):
        assert [len(BLOCK_ROTATIONS[b]) for b in (1, 2, 3, 4)] == [1, 2, 3, 0]

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_sca_and_circular_give_equal_states(self, n):
        # SCA only rotates and flips the circular pairs; CZ is symmetric and the layer is diagonal
        rng = np.random.default_rng(n)
        for _ in range(10):
            blocks = tuple(int(b) for b in rng.integers(1, 6, size=4))
            rots = {i: ("RY",) if i % 2 else ("RX", "RZ") for i, b in enumerate(blocks) if b == 5}
            sca = AnsatzSpec(blocks, {i: TwoLocalConfig(r, "sca") for i, r in rots.items()})
            circ = AnsatzSpec(blocks, {i: TwoLocalConfig(r, "circular") for i, r in rots.items()})
            a, b = build_circuit(sca, n), build_circuit(circ, n)
            theta = rng.uniform(-np.pi, np.pi, a.n_params)
            np.testing.assert_allclose(
                apply_circuit(zero_state(n), a, theta).amplitudes,
                apply_circuit(zero_state(n), b, theta).amplitudes,
                atol=1e-13,
            )

    def test_cz_layers_commute(self):
        # CZ gates are diagonal, so pair order inside a layer never changes the state
        n = 4
        a = build_circuit(AnsatzSpec((5,), {0: TwoLocalConfig(("RX",), "linear")}), n)
        b = build_circuit(AnsatzSpec((5,), {0: TwoLocalConfig(("RX",), "reverse_linear")}), n)
        theta = np.linspace(0.1, 1.3, n)
        np.testing.assert_allclose(circuit_unitary(a, theta), circuit_unitary(b, theta), atol=1e-14)


class TestParseProposal:
    def test_appendix_list(self):
        text = (
            "improved_ansatz_list = [4,1,5,1]\n"
            'twolocal_config = {"block": 2, "rotations": ["RY", "RZ"], "entanglement": "circular"}\n'
        )
        spec = parse_proposal(text)
        assert spec.blocks == (4, 1, 5, 1)
        assert spec.twolocal[2] == TwoLocalConfig(("RY", "RZ"), Entanglement.CIRCULAR)

    def test_fenced_with_spaces(self):
        assert parse_proposal("```\nimproved_ansatz_list = [2, 2]\n```").blocks == (2, 2)

    def test_no_list(self):
        with pytest.raises(NoAnsatzList):
            parse_proposal("I recommend nothing")

    def test_surrounding_prose(self):
        text = "Since the KL dropped, try:\n\n```python\nimproved_ansatz_list=[3,4]\n```\nGood luck."
        assert parse_proposal(text).blocks == (3, 4)

    def test_first_list_wins(self):
        assert parse_proposal("improved_ansatz_list = [1]\nimproved_ansatz_list = [2]").blocks == (1,)

    @pytest.mark.parametrize("body", ["0", "6", "1, 7", "-1", "1.5", "a", "", "1,,2"])
    def test_bad_entries(self, body):
        with pytest.raises(InvalidBlockIndex):
            parse_proposal(f"improved_ansatz_list = [{body}]")

    def test_twolocal_without_config(self):
        with pytest.raises(MissingTwoLocalConfig):
            parse_proposal("improved_ansatz_list = [1,5]")

    @pytest.mark.parametrize(
        "config",
        [
            "{not json}",
            '{"block": 0, "rotations": ["RY"]}',
            '{"block": 0, "rotations": ["RY"], "entanglement": "linear"}',
            '{"block": 9, "rotations": ["RY"], "entanglement": "linear"}',
            '{"block": 1, "rotations": [], "entanglement": "linear"}',
            '{"block": 1, "rotations": ["CX"], "entanglement": "linear"}',
            '{"block": 1, "rotations": "RY", "entanglement": "linear"}',
            '{"block": 1, "rotations": ["RY"], "entanglement": "star"}',
        ],
    )
    def test_malformed_config(self, config):
        with pytest.raises(MalformedTwoLocalConfig):
            parse_proposal(f"improved_ansatz_list = [1,5]\ntwolocal_config = {config}")

    def test_all_errors_are_proposal_errors(self):
        for text in ("nothing", "improved_ansatz_list = [9]", "improved_ansatz_list = [5]"):
            with pytest.raises(ProposalError):
                parse_proposal(text)


tags = st.integers(1, 5)
configs = st.builds(
    TwoLocalConfig,
    st.lists(st.sampled_from(["RX", "RY", "RZ"]), min_size=1, max_size=3, unique=True).map(tuple),
    st.sampled_from(list(Entanglement)),
)


@st.composite
def specs(draw):
    blocks = tuple(draw(st.lists(tags, min_size=1, max_size=8)))
    return AnsatzSpec(blocks, {i: draw(configs) for i, b in enumerate(blocks) if b == 5})


@settings(max_examples=300, deadline=None)
@given(spec=specs())
def test_render_parse_round_trip(spec):
    assert parse_proposal(render_proposal(spec)) == spec
    assert AnsatzSpec.from_dict(spec.to_dict()) == spec


def test_exhaustive_short_lists_round_trip():
    for blocks in itertools.product((1, 2, 3, 4), repeat=3):
        spec = AnsatzSpec(blocks)
        assert parse_proposal(f"improved_ansatz_list = {list(blocks)}").blocks == blocks
        assert probabilities(apply_circuit(zero_state(2), build_circuit(spec, 2), np.zeros(build_circuit(spec, 2).n_params))).sum() == pytest.approx(1.0)
