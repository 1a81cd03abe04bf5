import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_force_solve(A, b):
    """Gauss-Jordan elimination with partial pivoting on Python floats."""
    n = len(b)
    M = [[float(A[i][j]) for j in range(n)] + [float(b[i])] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0.0:
                f = M[r][col]
                M[r] = [vr - f * vc for vr, vc in zip(M[r], M[col])]
    return np.array([M[i][n] for i in range(n)])


def brute_force_expansion(centers, coefs, x, bandwidth=1.0):
    """Term-by-term Gaussian kernel expansion with the math module."""
    import math

    total = 0.0
    for c, a in zip(centers, coefs):
        sq = sum((float(ci) - float(xi)) ** 2 for ci, xi in zip(c, x))
        total += float(a) * math.exp(-sq / (2.0 * bandwidth * bandwidth))
    return total


# acceptance results, one entry per checked part: criterion -> [(ok, detail)]
ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE.setdefault(number, []).append((bool(ok), detail))
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        details = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {number}: {status}  {details}")
