"""Route checking used by several test modules, kept separate from the
package so solver results are judged by code that shares nothing with it."""


def independent_route_check(inst, routes):
    problems = []
    if len(routes) > inst.fleet_size:
        problems.append("too many routes")
    seen = set()
    for route in routes:
        if route[0] != inst.origin or route[-1] != inst.destination:
            problems.append(f"route endpoints wrong: {route}")
            continue
        dur = 0.0
        for a, b in zip(route, route[1:]):
            if not inst.arc_mask[a, b]:
                problems.append(f"missing arc ({a}, {b})")
                break
            dur += float(inst.travel_time[a, b])
        else:
            if dur > inst.time_limit + 1e-9:
                problems.append(f"route too long: {dur}")
        for v in route[1:-1]:
            if v in seen:
                problems.append(f"vertex {v} visited twice")
            seen.add(v)
    missing = inst.mandatory - seen
    if missing:
        problems.append(f"mandatory not covered: {sorted(missing)}")
    return problems
