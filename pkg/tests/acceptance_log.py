"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES = []


def record(criterion, title, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion:<3} {title}"
    if detail:
        line += f"  [{detail}]"
    LINES.append(line)
    print(line)
    return ok
