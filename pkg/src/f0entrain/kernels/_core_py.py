"""Pure-Python DTW kernel, used when the compiled extension is unavailable.

Operates on plain Python lists: for the short contours this toolkit
compares (roughly 6-13 values), interpreter overhead dominates, and list
indexing beats per-element numpy access by a wide margin.
"""


def dtw_distance(a, b):
    """Unnormalized DTW cost between two non-empty sequences of floats.

    Same recurrence as the compiled kernel: local cost |a_i - b_j|, steps
    diagonal/horizontal/vertical each adding one local cost,
    boundary-to-boundary path.
    """
    n = len(a)
    m = len(b)
    if n == 0 or m == 0:
        raise ValueError("dtw_distance requires non-empty sequences")

    b0 = b[0]
    a0 = a[0]
    prev = [0.0] * m
    prev[0] = a0 - b0 if a0 >= b0 else b0 - a0
    for j in range(1, m):
        bj = b[j]
        prev[j] = prev[j - 1] + (a0 - bj if a0 >= bj else bj - a0)
    for i in range(1, n):
        ai = a[i]
        cur = [0.0] * m
        cur[0] = prev[0] + (ai - b0 if ai >= b0 else b0 - ai)
        for j in range(1, m):
            best = prev[j - 1]
            pj = prev[j]
            if pj < best:
                best = pj
            cj = cur[j - 1]
            if cj < best:
                best = cj
            bj = b[j]
            cur[j] = best + (ai - bj if ai >= bj else bj - ai)
        prev = cur
    return prev[m - 1]
