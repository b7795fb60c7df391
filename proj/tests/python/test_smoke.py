import math

import numpy as np
import pytest

import explorium as ex


def test_uncertainty_worked_values():
    assert ex.uncertainty_per_action(np.array([[1.0, 0.0], [3.0, 0.0]])) == 1.0
    assert ex.uncertainty_value(np.array([[1.0, 0.0], [3.0, 0.0]])) == 2.0


def test_uncertainty_needs_two_members():
    with pytest.raises(ValueError):
        ex.uncertainty_per_action(np.zeros((1, 3)))


def test_kernel_and_memory():
    x = np.zeros((8, 8), dtype=np.uint8)
    y = x.copy()
    y.flat[:10] = 20
    assert ex.frame_kernel(x, x) == 1.0
    assert ex.frame_kernel(x, y) == pytest.approx(math.exp(-0.1), abs=1e-15)
    mem = ex.TrajectoryMemory()
    for _ in range(25):
        mem.push(x)
    assert len(mem) == 20
    assert mem.visit_frequency(x) == 20.0


def test_score_breakdown():
    b = ex.score_actions([1.0, 1.0], [2.0, 0.0], [3.0, 0.0], 0.1, 0.5)
    assert [a.score for a in b.actions] == pytest.approx([-0.3, 1.0], abs=1e-15)
    assert b.chosen == 1


def test_epsilon_schedule_defaults():
    assert ex.epsilon_schedule(0) == 1.0
    assert ex.epsilon_schedule(1_000_000) == pytest.approx(0.01)
    assert ex.epsilon_schedule(500_000) == pytest.approx(0.505)


def test_gridworld_renders_agent():
    w = ex.GridWorld("builtin:open", size=5, cell_px=2)
    frame = w.render()
    assert frame.shape == (10, 10)
    r, c = w.agent
    assert (frame[2 * r:2 * r + 2, 2 * c:2 * c + 2] == 200).all()
    reward, done, _ = w.step(4)
    assert reward == 0.0 and not done


def test_config_echo_and_errors():
    echo = ex.parse_config("q.K = 3\n")
    assert "q.K = 3" in echo
    assert "q.gamma = 0.99" in echo
    with pytest.raises(ValueError, match="line 1: q.K"):
        ex.parse_config("q.K = banana\n")


def test_short_training_run(tmp_path):
    text = "\n".join([
        "env.map = builtin:toy6", "env.cell_px = 1", "env.frame = 0", "pre.stack_m = 1",
        "q.K = 2", "q.arch = f8", "max_steps = 200", "q.batch = 8", "log.diagnostics = false",
    ])
    result = ex.train(text, tmp_path)
    assert result["status"] == "ok"
    assert result["env_steps"] == 200
    assert result["train_calls"] == 50
    ckpt = ex.load_checkpoint(tmp_path / "final.qens")
    assert "q/online/0/head/w" in ckpt
    header = (tmp_path / "metrics.csv").read_text().splitlines()[0]
    assert header.startswith("step,episode,episode_reward,running_avg_100")
