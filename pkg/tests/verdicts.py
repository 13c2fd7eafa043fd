"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES = []


def record(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    return line
