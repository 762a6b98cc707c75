"""End-to-end acceptance suite.

Each test prints one pass/fail line; the lines are echoed again in the
terminal summary (see conftest.ACCEPTANCE_REPORT). The heavyweight learning
runs (100 agents x 500 episodes per configuration) are shared through a
module-scoped fixture.
"""
import math
import time

import numpy as np
import pytest
from scipy import stats

from cleantable.advisor import ChannelNoise, SimulatedAdvisor
from cleantable.affordance import (
    dataset_matrices,
    decode_accuracy,
    failure_table,
    generate_dataset,
    initial_params,
    residual_jacobian,
    residuals,
)
from cleantable.cli import main as cli_main
from cleantable.fusion import CommandLexicon, Modality, UnimodalPrediction, integrate
from cleantable.harness import ETA_SWEEP, THETA_SWEEP, ExperimentConfig, run_condition
from cleantable.learner import LearnerConfig, N_ACTIONS, run_episode
from cleantable.scenario import ACTIONS, Action, enumerate_states

from conftest import ACCEPTANCE_REPORT

MASTER_SEED = 0
AGENTS = 100
EPISODES = 500


def report(number, name, passed, detail):
    line = f"criterion {number} ({name}): {'PASS' if passed else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_REPORT.append(line)
    assert passed, line


def _config(condition, theta=0.25, eta=1.0):
    return ExperimentConfig(
        condition=condition,
        agents=AGENTS,
        episodes=EPISODES,
        learner=LearnerConfig(theta_min=theta, eta=eta),
        noise=ChannelNoise(),
        master_seed=MASTER_SEED,
    )


@pytest.fixture(scope="module")
def runs(trained_net):
    """All thirteen full-size learning runs, with wall-clock per run."""
    out = {}
    times = {}

    def one(key, condition, theta=0.25, eta=1.0):
        t0 = time.perf_counter()
        out[key] = run_condition(_config(condition, theta, eta), net=trained_net)
        times[key] = time.perf_counter() - t0

    one(("rl", None), "rl")
    for theta in THETA_SWEEP:
        one(("irl", theta), "irl", theta=theta)
    for eta in ETA_SWEEP:
        one(("rl-aff", eta), "rl-aff", eta=eta)
        one(("irl-aff", eta), "irl-aff", eta=eta)
    return {"curves": out, "seconds": times}


def test_criterion_1_state_enumeration():
    t0 = time.perf_counter()
    states = enumerate_states()
    elapsed = time.perf_counter() - t0
    count = len(states)
    samples = count * len(ACTIONS)
    report(
        1,
        "state/dataset enumeration",
        count == 53 and samples == 371 and elapsed < 1.0,
        f"obtained {count} states / {samples} samples (target 53 / 371) in {elapsed:.3f}s",
    )


def test_criterion_2_effect_net_fidelity(trained_net_info):
    net = trained_net_info["net"]
    seconds = trained_net_info["seconds"]
    decode_acc, flag_acc = decode_accuracy(net)
    report(
        2,
        "effect-net fidelity",
        decode_acc >= 0.99 and flag_acc >= 0.99 and seconds < 30.0,
        f"decode {decode_acc:.4f}, failed-flag {flag_acc:.4f}, trained in {seconds:.1f}s",
    )


def test_criterion_3_gradient_check():
    rng = np.random.default_rng(42)
    x_all, t_all = dataset_matrices(generate_dataset())
    h = 1e-6
    worst = 0.0
    for _ in range(20):
        params = rng.normal(scale=0.7, size=initial_params(0).size)
        i = int(rng.integers(len(x_all)))
        x, t = x_all[i : i + 1], t_all[i : i + 1]
        _, jac = residual_jacobian(params, x, t)
        fd = np.empty_like(jac)
        for p in range(params.size):
            bump = np.zeros_like(params)
            bump[p] = h
            fd[:, p] = (residuals(params + bump, x, t) - residuals(params - bump, x, t)) / (2 * h)
        worst = max(worst, np.linalg.norm(jac - fd) / np.linalg.norm(fd))
    report(3, "gradient check", worst < 1e-4, f"worst relative error {worst:.2e} over 20 draws")


def test_criterion_4_fusion_math():
    def audio(label, conf):
        return UnimodalPrediction(label, conf, Modality.AUDIO)

    def vision(label, conf):
        return UnimodalPrediction(label, conf, Modality.VISION)

    ok = True
    details = []

    example = integrate(audio(Action.GO_LEFT, 0.8), vision(Action.GO_LEFT, 0.6)).confidence
    ok &= abs(example - 0.7968) < 1e-4
    details.append(f"congruent(0.8,0.6)={example:.4f}")

    maximal = integrate(audio(Action.WIPE, 1.0), vision(Action.WIPE, 1.0)).confidence
    ok &= maximal == 1.0
    details.append(f"max={maximal}")

    cancel = integrate(audio(Action.WIPE, 0.7), vision(Action.GRASP, 0.7)).confidence
    ok &= abs(cancel) < 1e-4
    details.append(f"cancel={cancel}")

    grid = [i * 0.05 for i in range(1, 21)]
    for ga in grid:
        for gv in grid:
            same = integrate(audio(Action.WIPE, ga), vision(Action.WIPE, gv)).confidence
            diff = integrate(audio(Action.WIPE, ga), vision(Action.GRASP, gv)).confidence
            ok &= same > diff
            ok &= 0.0 <= same <= 1.0 and 0.0 <= diff <= 1.0
    details.append("grid ordering + range held")
    report(4, "fusion math", bool(ok), "; ".join(details))


def test_criterion_5_condition_ordering(runs):
    curves, seconds = runs["curves"], runs["seconds"]
    rl = curves[("rl", None)].cumulative_per_agent
    irl = curves[("irl", 0.25)].cumulative_per_agent
    irl_aff = curves[("irl-aff", 0.8)].cumulative_per_agent
    p1 = stats.ttest_ind(rl, irl, equal_var=False, alternative="less").pvalue
    p2 = stats.ttest_ind(irl, irl_aff, equal_var=False, alternative="less").pvalue
    total = seconds[("rl", None)] + seconds[("irl", 0.25)] + seconds[("irl-aff", 0.8)]
    report(
        5,
        "condition ordering",
        p1 < 0.01 and p2 < 0.01 and total < 300.0,
        f"RL<IRL p={p1:.2e}, IRL<IRL+Aff p={p2:.2e}; means "
        f"{np.mean(rl):.1f}/{np.mean(irl):.1f}/{np.mean(irl_aff):.1f}; "
        f"3 runs took {total:.0f}s",
    )


def test_criterion_6_theta_sweep(runs):
    curves = runs["curves"]
    means = {theta: curves[("irl", theta)].mean_cumulative for theta in THETA_SWEEP}
    listing = ", ".join(f"theta={t:g}: {m:.1f}" for t, m in means.items())
    report(6, "theta sweep sanity", means[0.25] >= means[0.75], listing)


def test_criterion_7_eta_monotonicity(runs):
    curves = runs["curves"]
    ok = True
    details = []
    for condition in ("rl-aff", "irl-aff"):
        for lo, hi in zip(ETA_SWEEP, ETA_SWEEP[1:]):
            a, b = curves[(condition, lo)], curves[(condition, hi)]
            slack = 2 * math.hypot(a.stderr_cumulative, b.stderr_cumulative)
            if b.mean_cumulative < a.mean_cumulative - slack:
                ok = False
                details.append(f"{condition}: eta={hi} dropped below eta={lo}")
        smoothed = curves[(condition, 1.0)].smoothed_mean
        target = 0.95 * max(smoothed)
        crossing = next(i for i, v in enumerate(smoothed) if v >= target)
        ok &= crossing < 150
        details.append(f"{condition} eta=1 reaches 95% of max at episode {crossing}")
    report(7, "eta monotonicity and convergence", bool(ok), "; ".join(details))


def test_criterion_8_bypass_soundness(trained_net):
    fail = failure_table(trained_net)
    cfg = LearnerConfig(use_feedback=True, use_affordances=True, eta=1.0)
    advisor = SimulatedAdvisor(CommandLexicon.default(), ChannelNoise())
    q = np.zeros((len(enumerate_states()), N_ACTIONS))
    rng = np.random.default_rng(MASTER_SEED)
    failures = 0
    for _ in range(100):
        _, trace = run_episode(q, cfg, rng, advisor, fail, record_trace=True)
        failures += sum(rec.next_state == "failed" for rec in trace)
    report(8, "bypass soundness", failures == 0, f"{failures} failed terminals in 100 episodes")


def test_criterion_9_cli_determinism(tmp_path, capsys):
    argv = [
        "run", "--condition", "irl-aff", "--eta", "1.0", "--theta", "0.25",
        "--seed", "7", "--agents", "3", "--episodes", "10", "--epochs", "100",
    ]
    a, b = tmp_path / "a", tmp_path / "b"
    code_a = cli_main(argv + ["--out", str(a)])
    code_b = cli_main(argv + ["--out", str(b)])
    capsys.readouterr()
    name = "run_irl-aff_seed7.csv"
    identical = (a / name).read_bytes() == (b / name).read_bytes()
    with capsys.disabled():
        report(
            9,
            "CLI determinism",
            code_a == 0 and code_b == 0 and identical,
            f"repeated run produced byte-identical {name}: {identical}",
        )
