"""Independent brute-force oracles for the dynamic-programming similarity kernels.

These deliberately avoid the DP formulations: warping paths and edit scripts
are enumerated explicitly, and common subsequences are checked by trying every
index subsequence of the first argument.
"""

import math


def dtw_bruteforce(x, y):
    """Minimum accumulated squared cost over explicitly enumerated monotone paths."""
    m, n = len(x), len(y)
    best = math.inf
    stack = [(0, 0, (x[0] - y[0]) ** 2)]
    while stack:
        i, j, acc = stack.pop()
        if i == m - 1 and j == n - 1:
            best = min(best, acc)
            continue
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            ii, jj = i + di, j + dj
            if ii < m and jj < n:
                stack.append((ii, jj, acc + (x[ii] - y[jj]) ** 2))
    return best


def _matchable(sub, y, eps):
    """Can `sub` be epsilon-matched into y preserving order? Pure recursion."""
    if not sub:
        return True
    for j in range(len(y)):
        if abs(sub[0] - y[j]) <= eps and _matchable(sub[1:], y[j + 1:], eps):
            return True
    return False


def lcs_bruteforce(x, y, eps):
    """Longest common subsequence length by enumerating all subsequences of x."""
    best = 0
    for mask in range(1 << len(x)):
        sub = [x[i] for i in range(len(x)) if mask >> i & 1]
        if len(sub) > best and _matchable(sub, y, eps):
            best = len(sub)
    return best


def edr_bruteforce(x, y, eps):
    """Minimum edit cost by recursively enumerating every edit script."""
    if not len(y):
        return len(x)
    if not len(x):
        return len(y)
    penalty = 0 if abs(x[0] - y[0]) < eps else 1
    return min(
        edr_bruteforce(x[1:], y[1:], eps) + penalty,
        edr_bruteforce(x, y[1:], eps) + 1,
        edr_bruteforce(x[1:], y, eps) + 1,
    )
