# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled preflow push-relabel max-flow kernel.

Twin of ``_pushrelabel_py``: highest-label selection (intrusive height
buckets, one entry per vertex), gap relabeling, and heights up to 2n-1 so all
surplus drains back to the source and the result is a genuine flow.  Keep the
two in sync: the test suite runs them against each other.
"""

from libc.stdlib cimport free, malloc

COMPILED = True


def max_flow(int n, tails, heads, caps, int source, int sink):
    """Max flow on a digraph given as parallel arc arrays.

    Returns (flow_value, side) where side[v] is 1 when v lies on the source
    side of the min cut defined by residual reachability from the source.
    Deterministic for a fixed arc insertion order.
    """
    cdef int m = len(tails)
    cdef int ecap = 2 * m if m > 0 else 1
    cdef int *head = <int *> malloc(ecap * sizeof(int))
    cdef double *res = <double *> malloc(ecap * sizeof(double))
    cdef int *nxt = <int *> malloc(ecap * sizeof(int))
    cdef int *first = <int *> malloc(n * sizeof(int))
    cdef int *height = <int *> malloc(n * sizeof(int))
    cdef double *excess = <double *> malloc(n * sizeof(double))
    cdef int *cur = <int *> malloc(n * sizeof(int))
    cdef int *hcount = <int *> malloc((2 * n + 1) * sizeof(int))
    cdef int *bhead = <int *> malloc((2 * n + 1) * sizeof(int))
    cdef int *bnext = <int *> malloc(n * sizeof(int))
    cdef char *inb = <char *> malloc(n * sizeof(char))
    cdef char *cside = <char *> malloc(n * sizeof(char))
    cdef int *stack = <int *> malloc(n * sizeof(int))

    if (head == NULL or res == NULL or nxt == NULL or first == NULL or
            height == NULL or excess == NULL or cur == NULL or hcount == NULL or
            bhead == NULL or bnext == NULL or inb == NULL or cside == NULL or
            stack == NULL):
        free(head); free(res); free(nxt); free(first); free(height)
        free(excess); free(cur); free(hcount); free(bhead); free(bnext)
        free(inb); free(cside); free(stack)
        raise MemoryError()

    cdef int i, k, e, ee, u, v, w, old, new_h, hi, top, h
    cdef double c, delta, value

    try:
        for i in range(n):
            first[i] = -1
            height[i] = 0
            excess[i] = 0.0
            bnext[i] = -1
            inb[i] = 0
            cside[i] = 0
        for i in range(2 * n + 1):
            hcount[i] = 0
            bhead[i] = -1
        for k in range(m):
            u = tails[k]
            v = heads[k]
            c = caps[k]
            e = 2 * k
            head[e] = v
            res[e] = c
            nxt[e] = first[u]
            first[u] = e
            head[e + 1] = u
            res[e + 1] = 0.0
            nxt[e + 1] = first[v]
            first[v] = e + 1
        for i in range(n):
            cur[i] = first[i]
        hcount[0] = n - 1
        height[source] = n
        hcount[n] += 1

        e = first[source]
        while e != -1:
            if res[e] > 0.0:
                v = head[e]
                excess[v] += res[e]
                res[e ^ 1] += res[e]
                res[e] = 0.0
            e = nxt[e]

        hi = -1
        for v in range(n):
            if v != source and v != sink and excess[v] > 0.0:
                h = height[v]
                bnext[v] = bhead[h]
                bhead[h] = v
                inb[v] = 1
                if h > hi:
                    hi = h

        while hi >= 0:
            u = bhead[hi]
            if u == -1:
                hi -= 1
                continue
            bhead[hi] = bnext[u]
            inb[u] = 0
            if height[u] != hi:  # lifted while queued; file under new height
                if excess[u] > 0.0:
                    h = height[u]
                    bnext[u] = bhead[h]
                    bhead[h] = u
                    inb[u] = 1
                    if h > hi:
                        hi = h
                continue
            if excess[u] <= 0.0:
                continue
            while excess[u] > 0.0:
                e = cur[u]
                if e == -1:
                    # relabel u to one above its lowest residual neighbour
                    old = height[u]
                    new_h = 2 * n
                    ee = first[u]
                    while ee != -1:
                        if res[ee] > 0.0 and height[head[ee]] + 1 < new_h:
                            new_h = height[head[ee]] + 1
                        ee = nxt[ee]
                    if new_h >= 2 * n:
                        break  # no residual arc; unreachable on well-formed input
                    hcount[old] -= 1
                    height[u] = new_h
                    hcount[new_h] += 1
                    cur[u] = first[u]
                    if hcount[old] == 0 and old < n:
                        # gap: levels strictly between old and n are cut off
                        # from the sink, lift them past it
                        for w in range(n):
                            if w != source and w != u and old < height[w] and height[w] < n:
                                hcount[height[w]] -= 1
                                height[w] = n + 1
                                hcount[n + 1] += 1
                                cur[w] = first[w]
                    continue
                if res[e] > 0.0 and height[u] == height[head[e]] + 1:
                    v = head[e]
                    delta = excess[u]
                    if res[e] < delta:
                        delta = res[e]
                    res[e] -= delta
                    res[e ^ 1] += delta
                    excess[u] -= delta
                    excess[v] += delta
                    if v != source and v != sink and inb[v] == 0:
                        h = height[v]
                        bnext[v] = bhead[h]
                        bhead[h] = v
                        inb[v] = 1
                        if h > hi:
                            hi = h
                else:
                    cur[u] = nxt[e]

        # min cut: vertices reachable from the source in the final residual graph
        top = 0
        stack[top] = source
        top += 1
        cside[source] = 1
        while top > 0:
            top -= 1
            u = stack[top]
            e = first[u]
            while e != -1:
                v = head[e]
                if res[e] > 1e-12 and cside[v] == 0:
                    cside[v] = 1
                    stack[top] = v
                    top += 1
                e = nxt[e]

        value = excess[sink]
        side = [0] * n
        for i in range(n):
            side[i] = cside[i]
        return value, side
    finally:
        free(head); free(res); free(nxt); free(first); free(height)
        free(excess); free(cur); free(hcount); free(bhead); free(bnext)
        free(inb); free(cside); free(stack)
