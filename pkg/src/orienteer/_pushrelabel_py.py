"""Pure-Python preflow push-relabel max-flow kernel.

Fallback twin of the compiled ``_pushrelabel`` extension; both implement the
same algorithm: highest-label selection (intrusive height buckets, one entry
per vertex), gap relabeling, and heights up to 2n-1 so all surplus drains
back to the source and the result is a genuine flow.  Keep the two in sync:
the test suite runs them against each other.
"""

COMPILED = False


def max_flow(n, tails, heads, caps, source, sink):
    """Max flow on a digraph given as parallel arc arrays.

    Returns (flow_value, side) where side[v] is 1 when v lies on the source
    side of the min cut defined by residual reachability from the source.
    Deterministic for a fixed arc insertion order.
    """
    m = len(tails)
    # forward arc 2k, reverse arc 2k + 1; e ^ 1 is the mate of e
    head = [0] * (2 * m)
    res = [0.0] * (2 * m)
    first = [-1] * n
    nxt = [-1] * (2 * m)
    for k in range(m):
        u, v, c = tails[k], heads[k], caps[k]
        e = 2 * k
        head[e] = v
        res[e] = c
        nxt[e] = first[u]
        first[u] = e
        head[e + 1] = u
        nxt[e + 1] = first[v]
        first[v] = e + 1

    height = [0] * n
    excess = [0.0] * n
    cur = list(first)
    hcount = [0] * (2 * n + 1)
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

    # height buckets: singly linked through bnext, at most one entry per vertex
    bhead = [-1] * (2 * n + 1)
    bnext = [-1] * n
    inb = [False] * n
    hi = -1

    def enqueue(v):
        nonlocal hi
        h = height[v]
        bnext[v] = bhead[h]
        bhead[h] = v
        inb[v] = True
        if h > hi:
            hi = h

    for v in range(n):
        if v != source and v != sink and excess[v] > 0.0:
            enqueue(v)

    while hi >= 0:
        u = bhead[hi]
        if u == -1:
            hi -= 1
            continue
        bhead[hi] = bnext[u]
        inb[u] = False
        if height[u] != hi:  # lifted while queued; file under its new height
            if excess[u] > 0.0:
                enqueue(u)
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
                    # gap: levels strictly between old and n are cut off from
                    # the sink, lift them past it
                    for w in range(n):
                        if w != source and w != u and old < height[w] < n:
                            hcount[height[w]] -= 1
                            height[w] = n + 1
                            hcount[n + 1] += 1
                            cur[w] = first[w]
                continue
            if res[e] > 0.0 and height[u] == height[head[e]] + 1:
                v = head[e]
                delta = excess[u] if excess[u] < res[e] else res[e]
                res[e] -= delta
                res[e ^ 1] += delta
                excess[u] -= delta
                excess[v] += delta
                if v != source and v != sink and not inb[v]:
                    enqueue(v)
            else:
                cur[u] = nxt[e]

    # min cut: vertices reachable from the source in the final residual graph
    side = [0] * n
    stack = [source]
    side[source] = 1
    while stack:
        u = stack.pop()
        e = first[u]
        while e != -1:
            v = head[e]
            if res[e] > 1e-12 and not side[v]:
                side[v] = 1
                stack.append(v)
            e = nxt[e]

    return excess[sink], side
