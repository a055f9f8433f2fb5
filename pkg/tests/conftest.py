import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def closed_form_D(t, a, s=1.0):
    """Up/down distinguishability of the two-level model, derived by hand."""
    t = np.asarray(t, float)
    if a == 1.0:
        return 1.0 / np.sqrt(1.0 + 4.0 * (s * t) ** 4)
    th = np.sqrt(1 - a * a) * s * t
    return (1.0 + (2 * a * np.sin(th) ** 2 / (1 - a * a)) ** 2) ** -0.5


def closed_form_U(t, a, s=1.0):
    """exp(-i H t) for s(sigma_x + i a sigma_z), 0 <= a < 1."""
    r = np.sqrt(1 - a * a)
    th = r * s * t
    c, sn = np.cos(th), np.sin(th)
    return np.array([[r * c + a * sn, -1j * sn], [-1j * sn, r * c - a * sn]]) / r


@pytest.fixture
def report():
    def _report(num: int, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(ACCEPTANCE_LINES[-1])

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
