"""Compiled inner loops for the search.

Boards are flat ``uint8`` arrays indexed ``y * width + x``; the interior
never touches the array border, so neighbour arithmetic needs no bounds
checks. Box sets are sorted ``int32`` arrays of square indices.
"""
import numpy as np
from numba import njit

INF = 1_000_000_000

FEATURE_TARGETS = 0
FEATURE_DISTANCE = 1
FEATURE_GAMMA1 = 2
FEATURE_GAMMA2 = 3


@njit(cache=True)
def distance_table(floor, dirs, targets):
    """Lone-box push distances, shape (squares, targets), INF when unreachable."""
    size = floor.size
    dist = np.full((size, targets.size), INF, np.int64)
    queue = np.empty(size, np.int32)
    for j in range(targets.size):
        dist[targets[j], j] = 0
        queue[0] = targets[j]
        head, tail = 0, 1
        while head < tail:
            y = queue[head]
            head += 1
            for k in range(4):
                d = dirs[k]
                x = y - d
                if floor[x] and floor[x - d] and dist[x, j] == INF:
                    dist[x, j] = dist[y, j] + 1
                    queue[tail] = x
                    tail += 1
    return dist


@njit(cache=True)
def flood(floor, occ, dirs, start, mark, stack):
    """Mark the free squares 4-connected to ``start``; returns the region minimum."""
    mark[start] = 1
    stack[0] = start
    top = 1
    low = start
    while top > 0:
        top -= 1
        sq = stack[top]
        if sq < low:
            low = sq
        for k in range(4):
            nxt = sq + dirs[k]
            if floor[nxt] and not occ[nxt] and not mark[nxt]:
                mark[nxt] = 1
                stack[top] = nxt
                top += 1
    return low


@njit(cache=True)
def label_regions(floor, occ, dirs, labels, region_min, stack):
    """Label free-floor components in scan order; returns the component count.

    ``labels`` must be filled with -1. ``region_min[r]`` is the smallest
    square of component ``r``.
    """
    count = 0
    for start in range(floor.size):
        if not floor[start] or occ[start] or labels[start] >= 0:
            continue
        region_min[count] = start
        labels[start] = count
        stack[0] = start
        top = 1
        while top > 0:
            top -= 1
            sq = stack[top]
            for k in range(4):
                nxt = sq + dirs[k]
                if floor[nxt] and not occ[nxt] and labels[nxt] < 0:
                    labels[nxt] = count
                    stack[top] = nxt
                    top += 1
        count += 1
    return count


@njit(cache=True)
def _place(boxes, i, dest, out_row):
    """Copy ``boxes`` into ``out_row`` with entry ``i`` moved to ``dest``, kept sorted."""
    n = boxes.size
    w = 0
    inserted = False
    for r in range(n):
        if r == i:
            continue
        b = boxes[r]
        if not inserted and dest < b:
            out_row[w] = dest
            w += 1
            inserted = True
        out_row[w] = b
        w += 1
    if not inserted:
        out_row[w] = dest


@njit(cache=True)
def generate_moves(
    floor, dead, use_dead, dirs, boxes, player, pull, occ, mark, stack,
    out_boxes, out_player, out_move,
):
    """Children of one state, in box-then-U/D/L/R order.

    Pushes when ``pull`` is false, pulls otherwise. ``occ`` and ``mark`` are
    zeroed scratch buffers and are returned zeroed. Move codes are
    ``box_square * 4 + direction``.
    """
    for b in boxes:
        occ[b] = 1
    flood(floor, occ, dirs, player, mark, stack)
    m = 0
    for i in range(boxes.size):
        b = boxes[i]
        for k in range(4):
            d = dirs[k]
            if pull:
                dest = b + d
                if not mark[dest]:
                    continue
                retreat = dest + d
                if not floor[retreat] or occ[retreat]:
                    continue
                out_player[m] = retreat
            else:
                dest = b + d
                if not mark[b - d] or not floor[dest] or occ[dest]:
                    continue
                if use_dead and dead[dest]:
                    continue
                out_player[m] = b
            _place(boxes, i, dest, out_boxes[m])
            out_move[m] = b * 4 + k
            m += 1
    for b in boxes:
        occ[b] = 0
    mark[:] = 0
    return m


@njit(cache=True)
def min_cost_matching(cost, n):
    """Minimum-cost perfect matching on the leading n x n block (Hungarian, O(n^3))."""
    u = np.zeros(n + 1, np.int64)
    v = np.zeros(n + 1, np.int64)
    p = np.zeros(n + 1, np.int64)
    way = np.zeros(n + 1, np.int64)
    minv = np.empty(n + 1, np.int64)
    used = np.empty(n + 1, np.bool_)
    big = np.int64(1) << 62
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv[:] = big
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = big
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    total = 0
    for j in range(1, n + 1):
        total += cost[p[j] - 1, j - 1]
    return total


@njit(cache=True)
def matching_distance(dist, boxes, cost):
    """Push lower bound for a box set, or -1 when no finite matching exists."""
    n = boxes.size
    for i in range(n):
        row_ok = False
        for j in range(n):
            c = dist[boxes[i], j]
            cost[i, j] = c
            if c < INF:
                row_ok = True
        if not row_ok:
            return -1
    total = min_cost_matching(cost, n)
    if total >= INF:
        return -1
    return total


@njit(cache=True)
def features_batch(
    floor, target_mask, dirs, dist, n_floor, span, gamma, backward,
    col_conn, col_overlap, col_perm, traj, order,
    boxes_batch, players, count,
    out_feat, out_region, out_reward, out_valid,
    occ, labels, region_min, stack, cost,
):
    """Feature rows for ``count`` states.

    Column layout: Targets, Distance, Gamma1, Gamma2, then optional
    Connectivity/Overlap/Perm at the given column indices (-1 = off).
    ``out_region`` receives the minimum square of the player's region (or
    -1 when the player is unset); ``out_valid`` is false on infinite
    distance, in which case the row is left incomplete.
    """
    n = boxes_batch.shape[1]
    nn = max(n, 1)
    gamma1 = gamma ** n
    for c in range(count):
        boxes = boxes_batch[c]
        packed = 0
        for b in boxes:
            occ[b] = 1
            packed += target_mask[b]
        out_reward[c] = (packed == 0) if backward else (packed == n)
        raw = matching_distance(dist, boxes, cost)
        out_valid[c] = raw >= 0
        labels[:] = -1
        regions = label_regions(floor, occ, dirs, labels, region_min, stack)
        player = players[c]
        out_region[c] = region_min[labels[player]] if player >= 0 else -1
        if raw >= 0:
            row = out_feat[c]
            row[FEATURE_TARGETS] = packed / nn
            row[FEATURE_DISTANCE] = min(1.0, raw / (nn * span))
            row[FEATURE_GAMMA1] = gamma1
            row[FEATURE_GAMMA2] = gamma ** packed if backward else gamma ** (n - packed)
            if col_conn >= 0:
                row[col_conn] = min(1.0, max(0.0, (regions - 1) / max(1.0, n_floor / 4.0)))
            if col_overlap >= 0:
                best = 0
                for t in range(traj.shape[0]):
                    hits = 0
                    for b in boxes:
                        hits += traj[t, b]
                    if hits > best:
                        best = hits
                row[col_overlap] = best / nn
            if col_perm >= 0:
                prefix = 0
                while prefix < order.size and occ[order[prefix]]:
                    prefix += 1
                row[col_perm] = prefix / nn
        for b in boxes:
            occ[b] = 0


@njit(cache=True)
def descend(first_child, n_children, value, excluded, reward, epsilon, gamma, refresh,
            rand, pos):
    """Walk from the root to an unexpanded node, epsilon-greedily.

    Greedy steps take the highest stored value among non-excluded children,
    lowest index on ties. With ``refresh`` each internal node on the way
    down first re-derives its stored value from its children's current
    ones, so ancestors catch up lazily instead of by back-propagation.
    Returns (leaf, next random position, depth).
    """
    node = 0
    depth = 0
    while n_children[node] > 0:
        fc = first_child[node]
        nc = n_children[node]
        if refresh:
            top = -np.inf
            for c in range(fc, fc + nc):
                if not excluded[c]:
                    t = 1.0 if reward[c] else gamma * value[c]
                    if t > top:
                        top = t
            value[node] = top
        explore = False
        if epsilon > 0.0:
            explore = rand[pos] < epsilon
            pos += 1
        chosen = -1
        if explore:
            eligible = 0
            for c in range(fc, fc + nc):
                if not excluded[c]:
                    eligible += 1
            pick = int(rand[pos] * eligible)
            pos += 1
            for c in range(fc, fc + nc):
                if not excluded[c]:
                    if pick == 0:
                        chosen = c
                        break
                    pick -= 1
        else:
            best = -np.inf
            for c in range(fc, fc + nc):
                if not excluded[c] and value[c] > best:
                    best = value[c]
                    chosen = c
        node = chosen
        depth += 1
    return node, pos, depth
