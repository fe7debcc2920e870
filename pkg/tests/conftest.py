import numpy as np
import pytest

from ccca.regression import train_all


def standardize(M):
    M = np.asarray(M, dtype=float)
    return (M - M.mean(axis=1, keepdims=True)) / M.std(axis=1, ddof=1, keepdims=True)


def rotor_speed_standin(T=500, fs=50.0, seed=2019):
    """Deterministic 4 x T stand-in for generator rotor-speed deviations (rad/s) after a fault.

    Two coherent areas of two machines each: a shared lightly damped
    inter-area mode, an area-local mode and a small random-walk drift.
    Machines in one area are strongly dependent, across areas less so.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(T) / fs
    fault = 1.0
    tau = np.clip(t - fault, 0.0, None)
    on = (t >= fault).astype(float)
    inter = np.exp(-0.08 * tau) * np.sin(2 * np.pi * 0.62 * tau)
    local = [np.exp(-0.3 * tau) * np.sin(2 * np.pi * f * tau + ph) for f, ph in ((1.15, 0.0), (1.35, 0.7))]
    rows = []
    for k in range(4):
        area = k // 2
        sign = 1.0 if area == 0 else -0.8
        mode = local[area] * (1.0 if k % 2 == 0 else 0.75)
        drift = np.cumsum(rng.normal(0.0, 0.01, T))
        rows.append(on * (sign * inter + 0.6 * mode) + drift + 0.02 * rng.normal(size=T))
    return np.array(rows)


@pytest.fixture(scope="session")
def trained_coeffs():
    return train_all(seed=0)


@pytest.fixture(scope="session")
def coeffs_file(tmp_path_factory, trained_coeffs):
    from ccca.regression import write_coefficients

    path = tmp_path_factory.mktemp("coeffs") / "coefficients.ini"
    write_coefficients(trained_coeffs, path)
    return path


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
