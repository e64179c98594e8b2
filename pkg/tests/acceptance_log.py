"""Shared record of acceptance outcomes, printed at the end of the run."""

RESULTS: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})"
    RESULTS.append(line)
    print(line)
