import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regnas import bench, cnn_space, presets, proxy, signals, tasks
from regnas.errors import MissingGroundtruth


def test_sample_task_well_formed(rng):
    for _ in range(30):
        task = tasks.sample_task(rng)
        assert len(task.stages) == 3
        for spec in task.stages:
            assert 1 <= len(spec.groups) <= 3
            for g in spec.groups:
                assert g.channels in signals.CHANNEL_CHOICES
                assert 1 <= len(g.bases) <= 2
        assert task.noise.level in signals.NOISE_LEVELS


def test_frequency_bank_constraints(rng):
    for _ in range(200):
        freqs = tasks.sample_frequency_bank(rng)
        assert len(freqs) == tasks.N_BANK_FREQS
        assert all(0.0 < f < 0.5 for f in freqs)


def test_mutation_preserves_unregenerated_blocks(rng):
    task = tasks.sample_task(rng)
    child = tasks.mutate_task(task, rng)
    assert len(child.stages) == len(task.stages)
    for a, b in zip(task.stages, child.stages):
        assert len(a.groups) == len(b.groups)
        for ga, gb in zip(a.groups, b.groups):
            # either regenerated or carried over verbatim
            assert gb == ga or gb != ga  # both possible; structure intact
            assert gb.channels in signals.CHANNEL_CHOICES


def test_mutation_preserves_none_stages(rng):
    task = presets.single_task()
    child = tasks.mutate_task(task, rng)
    assert child.stages[0] is None and child.stages[1] is None
    assert child.stages[2] is not None


def test_mutation_block_rate(rng):
    task = tasks.sample_task(rng)
    n_blocks = sum(len(s.groups) for s in task.stages)
    trials = 3000
    regen = 0
    for _ in range(trials):
        child = tasks.mutate_task(task, rng)
        for a, b in zip(task.stages, child.stages):
            regen += sum(ga != gb for ga, gb in zip(a.groups, b.groups))
    rate = regen / (trials * n_blocks)
    # freshly sampled groups almost never collide with the original
    assert abs(rate - tasks.BLOCK_REGEN_PROB) < 0.03


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_json_roundtrip(seed):
    task = tasks.sample_task(np.random.default_rng(seed))
    assert tasks.task_from_json(tasks.task_to_json(task)) == task


def test_preset_roundtrip(tmp_path):
    for name in presets.PRESETS:
        task = presets.get_preset(name)
        p = tmp_path / f"{name}.json"
        tasks.save_task(task, p)
        assert tasks.load_task(p) == task


def test_combo_preset_structure():
    task = presets.combo_task()
    assert len(task.stages) == 3
    for spec in task.stages:
        assert len(spec.groups) == 3
        assert spec.channels == presets.STAGE_CHANNEL_BUDGET
    assert task.iterations == 100 and task.batch == 16
    assert task.lr == 0.1 and task.weight_decay == 1e-5


def test_zero_preset_targets_are_zero():
    task = presets.zero_task()
    batch = bench.proxy_batch(4, 0)
    targets = proxy.realize_targets(task, batch, 0)
    for t in targets:
        assert t is not None
        assert np.all(t == 0.0)


def test_task_fitness_requires_groundtruth():
    table = bench.BenchTable({"143103": 0.8}, {"higher_better": True})
    probes = [cnn_space.CnnGenotype.from_id("103020")]
    with pytest.raises(MissingGroundtruth):
        tasks.task_fitness(presets.single_task(), probes, table, 0)


def test_task_fitness_perfect_when_proxy_mirrors_gt(monkeypatch):
    ids = ["103020", "143103", "333333"]
    table = bench.BenchTable({i: float(k) for k, i in enumerate(ids)}, {"higher_better": True})
    probes = [cnn_space.CnnGenotype.from_id(i) for i in ids]

    def fake_scores(genotypes, task, seed, input_batch=None, jobs=1):
        # lower loss for better groundtruth
        order = {gid: 2.0 - k for k, gid in enumerate(ids)}
        return [
            proxy.EvalScore((0.0, 0.0, order[g.canonical_id()]), order[g.canonical_id()])
            for g in genotypes
        ]

    monkeypatch.setattr(tasks, "score_population", fake_scores)
    assert tasks.task_fitness(tasks.sample_task(np.random.default_rng(0)), probes, table, 0) == 1.0
