"""Shaped rewards, REINFORCE, revision algorithms, and the training loop."""

import itertools

import numpy as np
import pytest

from natlog.chunker import chunk_pair, default_rules
from natlog.data import Example
from natlog.executor import Chunk, ChunkedPair, execute, matches_target
from natlog.knowledge import Proposal, ProposalQueue, default_lexicon
from natlog.policy import (
    N_FEATURES,
    PolicyParams,
    featurize_pair,
    step_distributions,
)
from natlog.relations import (
    ACTIONS,
    ActionRelation,
    CONTEXTS,
    NLILabel,
    Relation,
    UPWARD,
)
from natlog.trainer import (
    IRConfig,
    RewardConfig,
    TrainConfig,
    fix,
    grid_search,
    hybrid_objective,
    introspective_revision,
    load_train_config,
    mutual_entailment_filter,
    reinforce_objective,
    relation_augmentation,
    reward,
    run_episode,
    train,
)
from natlog.trainer import _compile_examples

A_EQ = ActionRelation.EQUIVALENCE
A_FE = ActionRelation.FORWARD_ENTAILMENT
A_RE = ActionRelation.REVERSE_ENTAILMENT
A_NA = ActionRelation.NEG_ALT
A_IND = ActionRelation.INDEPENDENCE

RULES = default_rules()
LEX = default_lexicon()
RCFG = RewardConfig()


def upward_pair(m):
    premise = (Chunk(tokens=("p",), start=0),)
    hypothesis = tuple(Chunk(tokens=(f"h{i}",), start=i) for i in range(m))
    return ChunkedPair(premise=premise, hypothesis=hypothesis)


def uniform_probs(m):
    return np.full((m, 5), 0.2)


class TestReward:
    def test_correct_program_earns_mu_everywhere(self):
        pair = upward_pair(3)
        trace = execute(pair, (A_EQ, A_EQ, A_FE))
        assert trace.label == NLILabel.ENTAILMENT
        assert reward(trace, NLILabel.ENTAILMENT, RCFG) == (1.0, 1.0, 1.0)

    def test_wrong_program_blames_later_steps_more(self):
        pair = upward_pair(3)
        trace = execute(pair, (A_EQ, A_EQ, A_FE))
        assert reward(trace, NLILabel.CONTRADICTION, RCFG) == (-0.25, -0.5, -1.0)

    def test_hopeless_step_terminates_early(self):
        # independence at step 1 locks the label to neutral
        pair = upward_pair(3)
        trace = execute(pair, (A_IND, A_EQ, A_EQ))
        assert reward(trace, NLILabel.CONTRADICTION, RCFG) == (-1.0, 0.0, 0.0)

    def test_hopeless_step_mid_program(self):
        pair = upward_pair(3)
        trace = execute(pair, (A_EQ, A_IND, A_EQ))
        assert reward(trace, NLILabel.ENTAILMENT, RCFG) == (0.0, -1.0, 0.0)

    def test_equivalence_final_state_suppresses_positives(self):
        pair = upward_pair(3)
        trace = execute(pair, (A_EQ, A_EQ, A_EQ))
        assert trace.label == NLILabel.ENTAILMENT
        assert reward(trace, NLILabel.ENTAILMENT, RCFG) == (0.0, 0.0, 0.0)

    def test_suppression_can_be_disabled(self):
        pair = upward_pair(3)
        trace = execute(pair, (A_EQ, A_EQ, A_EQ))
        cfg = RewardConfig(prefer_forward_entailment=False)
        assert reward(trace, NLILabel.ENTAILMENT, cfg) == (1.0, 1.0, 1.0)

    def test_relation_target_rewards(self):
        pair = upward_pair(2)
        good = execute(pair, (A_RE, A_EQ))
        assert reward(good, Relation.REVERSE_ENTAILMENT, RCFG) == (1.0, 1.0)
        bad = execute(pair, (A_FE, A_EQ))
        # forward entailment can never join back to reverse entailment
        assert reward(bad, Relation.REVERSE_ENTAILMENT, RCFG) == (-1.0, 0.0)

    def test_reward_values_stay_in_contract(self):
        pair = upward_pair(3)
        cfg = RewardConfig(mu=1.0, gamma=0.5)
        allowed = {1.0, 0.0, -1.0, -0.25, -0.5}
        for program in itertools.product(ACTIONS, repeat=3):
            trace = execute(pair, program)
            for target in NLILabel:
                for r in reward(trace, target, cfg):
                    assert r in allowed

    def test_custom_mu_and_gamma(self):
        pair = upward_pair(2)
        trace = execute(pair, (A_EQ, A_EQ))
        cfg = RewardConfig(mu=2.0, gamma=0.1, prefer_forward_entailment=False)
        assert reward(trace, NLILabel.CONTRADICTION, cfg) == (-0.2, -2.0)


class TestReinforceObjective:
    def test_golden_value_uniform_policy(self):
        params = PolicyParams.zeros()
        features = np.ones((1, N_FEATURES))
        j, grad = reinforce_objective(params, features, (A_EQ,), (1.0,))
        assert j == pytest.approx(-np.log(0.2))
        assert grad.shape == params.weights.shape

    def test_zero_reward_steps_contribute_nothing(self):
        params = PolicyParams.zeros()
        features = np.ones((2, N_FEATURES))
        j, grad = reinforce_objective(params, features, (A_EQ, A_FE), (0.0, 0.0))
        assert j == 0.0
        assert np.array_equal(grad, np.zeros_like(grad))

    def test_negative_reward_flips_gradient(self):
        params = PolicyParams.zeros()
        features = np.ones((1, N_FEATURES))
        _, g_pos = reinforce_objective(params, features, (A_EQ,), (1.0,))
        _, g_neg = reinforce_objective(params, features, (A_EQ,), (-1.0,))
        assert np.allclose(g_pos, -g_neg)

    @pytest.mark.parametrize("seed", range(3))
    def test_gradient_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        params = PolicyParams(weights=rng.normal(scale=0.5, size=(5, N_FEATURES)))
        m = 3
        features = rng.random((m, N_FEATURES))
        program = tuple(ACTIONS[i] for i in rng.integers(0, 5, size=m))
        rewards = tuple(float(r) for r in rng.choice([-1.0, -0.5, 1.0], size=m))
        _, analytic = reinforce_objective(params, features, program, rewards)
        h = 1e-5
        fd = np.zeros_like(analytic)
        for i in range(fd.shape[0]):
            for j in range(fd.shape[1]):
                for sign, store in ((1, "plus"), (-1, "minus")):
                    p = PolicyParams(weights=params.weights.copy())
                    p.weights[i, j] += sign * h
                    val, _ = reinforce_objective(p, features, program, rewards)
                    if sign == 1:
                        plus = val
                    else:
                        minus = val
                fd[i, j] = (plus - minus) / (2 * h)
        scale = max(np.abs(analytic).max(), np.abs(fd).max(), 1e-12)
        assert (np.abs(analytic - fd) / scale).max() <= 1e-6


class TestFix:
    def test_replaces_single_step(self):
        program = (A_EQ, A_EQ, A_EQ)
        assert fix(program, 2, A_FE) == (A_EQ, A_FE, A_EQ)

    def test_one_based_bounds(self):
        program = (A_EQ, A_EQ)
        assert fix(program, 1, A_NA)[0] == A_NA
        assert fix(program, 2, A_NA)[1] == A_NA
        with pytest.raises(ValueError):
            fix(program, 0, A_NA)
        with pytest.raises(ValueError):
            fix(program, 3, A_NA)

    def test_original_untouched(self):
        program = (A_EQ, A_EQ)
        fix(program, 1, A_IND)
        assert program == (A_EQ, A_EQ)


def exhaustive_single_edits(pair, program, target):
    """Oracle: all (t, action) whose one-step edit reaches the target."""
    keys = set()
    for t in range(1, len(program) + 1):
        for action in ACTIONS:
            if matches_target(execute(pair, fix(program, t, action)), target):
                keys.add((t, action))
    return keys


class TestGridSearch:
    def test_matches_exhaustive_oracle_random(self):
        rng = np.random.default_rng(404)
        contexts = [UPWARD, CONTEXTS["not"], CONTEXTS["all-arg1"], CONTEXTS["some-arg2"]]
        for _ in range(200):
            m = int(rng.integers(1, 5))
            hyp = tuple(
                Chunk(
                    tokens=(f"h{i}",),
                    start=i,
                    context=contexts[int(rng.integers(len(contexts)))],
                )
                for i in range(m)
            )
            pair = ChunkedPair(premise=(Chunk(tokens=("p",), start=0),), hypothesis=hyp)
            program = tuple(ACTIONS[i] for i in rng.integers(0, 5, size=m))
            target = list(NLILabel)[int(rng.integers(3))]
            psi = grid_search(pair, program, ProposalQueue(), target, uniform_probs(m))
            assert psi.keys() == exhaustive_single_edits(pair, program, target)

    def test_correct_program_keeps_identity_edits(self):
        pair = upward_pair(2)
        program = (A_FE, A_EQ)
        psi = grid_search(
            pair, program, ProposalQueue(), NLILabel.ENTAILMENT, uniform_probs(2)
        )
        assert (1, A_FE) in psi.keys()
        assert (2, A_EQ) in psi.keys()

    def test_intersects_with_pending_proposals(self):
        pair = upward_pair(2)
        program = (A_EQ, A_EQ)
        phi = ProposalQueue([Proposal(t=1, relation=A_FE, prob=0.2)])
        psi = grid_search(pair, program, phi, NLILabel.ENTAILMENT, uniform_probs(2))
        assert psi.keys() == frozenset({(1, A_FE)})

    def test_disjoint_proposals_leave_grid_untouched(self):
        pair = upward_pair(2)
        program = (A_EQ, A_EQ)
        phi = ProposalQueue([Proposal(t=1, relation=A_IND, prob=0.2)])
        psi = grid_search(pair, program, phi, NLILabel.CONTRADICTION, uniform_probs(2))
        assert psi.keys() == exhaustive_single_edits(
            pair, program, NLILabel.CONTRADICTION
        )

    def test_unreachable_target_gives_empty_queue(self):
        pair = upward_pair(1)
        psi = grid_search(
            pair, (A_EQ,), ProposalQueue(), Relation.COVER, uniform_probs(1)
        )
        assert len(psi) == 0


class TestIntrospectiveRevision:
    def test_knowledge_acceptance_with_zero_epsilon(self):
        pair = upward_pair(2)
        program = (A_EQ, A_EQ)
        phi = ProposalQueue([Proposal(t=1, relation=A_FE, prob=0.9)])
        cfg = IRConfig(max_revisions=3, epsilon=0.0)
        revised, events = introspective_revision(
            pair, program, NLILabel.ENTAILMENT, phi,
            uniform_probs(2), cfg, np.random.default_rng(0),
        )
        assert revised == (A_FE, A_EQ)
        assert len(events) == 1
        assert events[0].source == "knowledge"
        assert events[0].old == A_EQ and events[0].new == A_FE and events[0].t == 1

    def test_budget_limits_pops(self):
        pair = upward_pair(3)
        program = (A_EQ, A_EQ, A_EQ)
        phi = ProposalQueue(
            [
                Proposal(t=1, relation=A_FE, prob=0.9),
                Proposal(t=2, relation=A_FE, prob=0.8),
                Proposal(t=3, relation=A_FE, prob=0.7),
            ]
        )
        cfg = IRConfig(max_revisions=1, epsilon=0.0)
        revised, _ = introspective_revision(
            pair, program, NLILabel.ENTAILMENT, phi,
            uniform_probs(3), cfg, np.random.default_rng(0),
        )
        # only the top proposal is consumed; the rest stay queued
        assert revised == (A_FE, A_EQ, A_EQ)
        assert len(phi) == 2

    def test_no_budget_and_no_grid_fix_returns_unchanged(self):
        pair = upward_pair(1)
        program = (A_EQ,)
        cfg = IRConfig(max_revisions=0, epsilon=0.2)
        revised, events = introspective_revision(
            pair, program, Relation.COVER, ProposalQueue(),
            uniform_probs(1), cfg, np.random.default_rng(0),
        )
        assert revised == program
        assert events == ()

    def test_answer_driven_fix_when_knowledge_is_empty(self):
        pair = upward_pair(2)
        program = (A_EQ, A_EQ)
        cfg = IRConfig(max_revisions=3, epsilon=0.2)
        probs = np.array(
            [
                [0.1, 0.2, 0.4, 0.2, 0.1],
                [0.6, 0.1, 0.1, 0.1, 0.1],
            ]
        )
        revised, events = introspective_revision(
            pair, program, NLILabel.NEUTRAL, ProposalQueue(),
            probs, cfg, np.random.default_rng(0),
        )
        # the most probable single edit to neutral is reverse entailment at 1
        assert revised == (A_RE, A_EQ)
        assert [e.source for e in events] == ["answer"]

    def test_knowledge_then_answer(self):
        # proposal fixes step 1 but the program still misses the target;
        # the answer phase must then repair step 2
        pair = upward_pair(2)
        program = (A_EQ, A_IND)
        phi = ProposalQueue([Proposal(t=1, relation=A_NA, prob=0.9)])
        cfg = IRConfig(max_revisions=1, epsilon=0.0)
        rng = np.random.default_rng(1)
        revised, events = introspective_revision(
            pair, program, NLILabel.CONTRADICTION, phi,
            uniform_probs(2), cfg, rng,
        )
        assert revised == (A_NA, A_EQ)
        assert [e.source for e in events] == ["knowledge", "answer"]

    def test_metropolis_rejects_low_ratio_proposals(self):
        # epsilon = 1 forces every proposal through the Metropolis branch;
        # a vanishing proposal probability means certain rejection
        pair = upward_pair(1)
        program = (A_EQ,)
        probs = np.array([[0.999999, 1e-9, 1e-9, 1e-9, 1e-9]])
        phi = ProposalQueue([Proposal(t=1, relation=A_FE, prob=1e-9)])
        cfg = IRConfig(max_revisions=1, epsilon=1.0)
        revised, events = introspective_revision(
            pair, program, NLILabel.ENTAILMENT, phi, probs, cfg,
            np.random.default_rng(0),
        )
        # the answer phase may still fix it; the knowledge phase must not
        assert all(e.source != "knowledge" for e in events)

    def test_metropolis_acceptance_frequency(self):
        # target is unreachable so the execution check always fails and
        # the answer phase never fires; acceptance ratio is 0.25/0.5
        pair = upward_pair(1)
        program = (A_EQ,)
        probs = np.array([[0.5, 0.25, 0.1, 0.1, 0.05]])
        cfg = IRConfig(max_revisions=1, epsilon=0.2)
        n = 100_000
        accepted = 0
        for i in range(n):
            phi = ProposalQueue([Proposal(t=1, relation=A_FE, prob=0.25)])
            revised, _ = introspective_revision(
                pair, program, Relation.COVER, phi, probs, cfg,
                np.random.default_rng([99, i]),
            )
            if revised == (A_FE,):
                accepted += 1
        p = 0.5
        sigma = np.sqrt(p * (1 - p) / n)
        assert abs(accepted / n - p) < 3 * sigma

    def test_deterministic_given_rng_stream(self):
        pair = upward_pair(2)
        program = (A_EQ, A_EQ)
        cfg = IRConfig()
        out = []
        for _ in range(2):
            phi = ProposalQueue([Proposal(t=1, relation=A_FE, prob=0.4)])
            out.append(
                introspective_revision(
                    pair, program, NLILabel.ENTAILMENT, phi,
                    uniform_probs(2), cfg, np.random.default_rng(5),
                )
            )
        assert out[0] == out[1]


class TestHybridObjective:
    def make_episode(self, params):
        examples = [
            Example(
                premise="some dogs run",
                hypothesis="some animals run",
                label=NLILabel.ENTAILMENT,
            )
        ]
        compiled = _compile_examples(examples, RULES, LEX, use_knowledge=True)
        config = TrainConfig(seed=3)
        return run_episode(params, compiled[0], config, np.random.default_rng(3))

    def test_lambda_one_is_pure_reinforce(self):
        params = PolicyParams.zeros()
        episode = self.make_episode(params)
        j, grad = hybrid_objective(params, episode, 1.0)
        j_base, grad_base = reinforce_objective(
            params, episode.features, episode.program, episode.rewards
        )
        assert j == pytest.approx(j_base)
        assert np.allclose(grad, grad_base)

    def test_lambda_zero_is_pure_revised(self):
        params = PolicyParams.zeros()
        episode = self.make_episode(params)
        assert episode.revised_program is not None
        j, grad = hybrid_objective(params, episode, 0.0)
        j_rev, grad_rev = reinforce_objective(
            params, episode.features, episode.revised_program, episode.revised_rewards
        )
        assert j == pytest.approx(j_rev)
        assert np.allclose(grad, grad_rev)

    def test_interpolation_is_linear(self):
        params = PolicyParams.zeros()
        episode = self.make_episode(params)
        j0, g0 = hybrid_objective(params, episode, 0.0)
        j1, g1 = hybrid_objective(params, episode, 1.0)
        jh, gh = hybrid_objective(params, episode, 0.5)
        assert jh == pytest.approx(0.5 * j0 + 0.5 * j1)
        assert np.allclose(gh, 0.5 * g0 + 0.5 * g1)


class TestRelationAugmentation:
    def test_entailment_pairs_get_swapped_samples(self):
        examples = [
            Example(
                premise="some dogs run",
                hypothesis="some animals run",
                label=NLILabel.ENTAILMENT,
            )
        ]
        out = relation_augmentation(examples, RULES, LEX)
        assert len(out) == 2
        assert out[0] is examples[0]
        swapped = out[1]
        assert swapped.premise == "some animals run"
        assert swapped.hypothesis == "some dogs run"
        assert swapped.label is None
        assert swapped.target_state == Relation.REVERSE_ENTAILMENT
        assert swapped.target == Relation.REVERSE_ENTAILMENT

    def test_mutual_entailment_is_skipped(self):
        examples = [
            Example(
                premise="the kid runs",
                hypothesis="the child runs",
                label=NLILabel.ENTAILMENT,
            )
        ]
        assert len(relation_augmentation(examples, RULES, LEX)) == 1

    def test_non_entailment_untouched(self):
        examples = [
            Example(
                premise="some dogs run",
                hypothesis="some dogs sleep",
                label=NLILabel.NEUTRAL,
            ),
            Example(
                premise="all dogs run",
                hypothesis="all dogs sleep",
                label=NLILabel.CONTRADICTION,
            ),
        ]
        assert relation_augmentation(examples, RULES, LEX) == examples

    def test_custom_filter_wins(self):
        examples = [
            Example(
                premise="some dogs run",
                hypothesis="some animals run",
                label=NLILabel.ENTAILMENT,
            )
        ]
        out = relation_augmentation(
            examples, RULES, LEX, entailment_filter=lambda ex: True
        )
        assert len(out) == 1

    def test_mutual_filter_detects_synonym_rewrites(self):
        flt = mutual_entailment_filter(RULES, LEX)
        assert flt(
            Example(premise="the kid runs", hypothesis="the child runs")
        )
        assert not flt(
            Example(premise="some dogs run", hypothesis="some animals run")
        )


def tiny_dataset():
    return [
        Example(
            premise="some dogs run",
            hypothesis="some animals run",
            label=NLILabel.ENTAILMENT,
        ),
        Example(
            premise="no animals run",
            hypothesis="no dogs run",
            label=NLILabel.ENTAILMENT,
        ),
        Example(
            premise="all dogs run",
            hypothesis="all dogs sleep",
            label=NLILabel.CONTRADICTION,
        ),
        Example(
            premise="some animals run",
            hypothesis="some dogs run",
            label=NLILabel.NEUTRAL,
        ),
    ]


class TestTrain:
    def test_runs_and_reports_metrics(self):
        config = TrainConfig(epochs=3, seed=1, augmentation=False)
        result = train(tiny_dataset(), RULES, LEX, config)
        assert len(result.metrics) == 3
        for em in result.metrics:
            stats = em.revisions
            assert stats.episodes == 4
            total = stats.knowledge_only + stats.answer_only + stats.both + stats.none
            assert total == stats.episodes
            assert all(v >= 0 for v in stats.per_relation.values())
            revised = stats.knowledge_only + stats.answer_only + stats.both
            assert sum(stats.per_relation.values()) >= revised

    def test_deterministic_across_runs(self):
        config = TrainConfig(epochs=2, seed=7)
        a = train(tiny_dataset(), RULES, LEX, config)
        b = train(tiny_dataset(), RULES, LEX, config)
        assert np.array_equal(a.params.weights, b.params.weights)
        assert [m.to_record() for m in a.metrics] == [
            m.to_record() for m in b.metrics
        ]

    def test_different_seeds_diverge(self):
        a = train(tiny_dataset(), RULES, LEX, TrainConfig(epochs=2, seed=1))
        b = train(tiny_dataset(), RULES, LEX, TrainConfig(epochs=2, seed=2))
        assert not np.array_equal(a.params.weights, b.params.weights)

    def test_no_revisions_without_ir(self):
        config = TrainConfig(epochs=1, seed=0, introspective_revision=False)
        result = train(tiny_dataset(), RULES, LEX, config)
        stats = result.metrics[0].revisions
        assert stats.none == stats.episodes
        assert stats.per_relation == {}

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            train([], RULES, LEX, TrainConfig())

    def test_learning_improves_tiny_task(self):
        config = TrainConfig(
            epochs=25, seed=0, learning_rate=0.1, batch_size=2, augmentation=False
        )
        result = train(tiny_dataset(), RULES, LEX, config)
        assert result.metrics[-1].train_accuracy >= 0.75


class TestTrainConfigFile:
    def test_load_all_keys(self, tmp_path):
        path = tmp_path / "train.cfg"
        path.write_text(
            "# config\n"
            "mu = 2.0\n"
            "gamma = 0.9\n"
            "M = 5\n"
            "epsilon = 0.1\n"
            "lambda = 0.7\n"
            "epochs = 12\n"
            "learning_rate = 0.01\n"
            "batch_size = 4\n"
            "seed = 99\n"
            "prefer_forward_entailment = false\n"
            "introspective_revision = true\n"
            "knowledge = false\n"
            "augmentation = off\n"
            "shuffle = yes\n"
        )
        cfg = load_train_config(path)
        assert cfg.mu == 2.0
        assert cfg.gamma == 0.9
        assert cfg.max_revisions == 5
        assert cfg.epsilon == 0.1
        assert cfg.lam == 0.7
        assert cfg.epochs == 12
        assert cfg.learning_rate == 0.01
        assert cfg.batch_size == 4
        assert cfg.seed == 99
        assert cfg.prefer_forward_entailment is False
        assert cfg.knowledge is False
        assert cfg.augmentation is False
        assert cfg.shuffle is True

    def test_defaults_match_stated_values(self):
        cfg = TrainConfig()
        assert cfg.mu == 1.0
        assert cfg.gamma == 0.5
        assert cfg.max_revisions == 3
        assert cfg.epsilon == 0.2
        assert cfg.lam == 0.5

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "train.cfg"
        path.write_text("momentum = 0.9\n")
        with pytest.raises(ValueError):
            load_train_config(path)

    def test_malformed_line_rejected(self, tmp_path):
        path = tmp_path / "train.cfg"
        path.write_text("mu 1.0\n")
        with pytest.raises(ValueError):
            load_train_config(path)
