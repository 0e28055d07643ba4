"""Cross-checks `musan batch` reports against a from-scratch reading of the
notation: tokens tile the song, the SDL matches its definition and the
sections match the separator rule.

usage: check_reports.py <musan binary> <song dir> <scratch dir>
"""

import json
import pathlib
import re
import subprocess
import sys

H, G = 1.0, 1.3
FILLERS = set("Xxio")


def tokens(structure):
    out = [(m.group(1), int(m.group(2))) for m in re.finditer(r"([A-Za-z])(\d+)", structure)]
    assert "".join(f"{l}{n}" for l, n in out) == structure, structure
    return out


def sdl(toks):
    groups = {}
    described = 0.0
    for label, n in toks:
        if label in FILLERS:
            described += n
        else:
            groups.setdefault(label, []).append(n)
    described += sum(sum(v) / len(v) for v in groups.values())
    return H * len(toks) + G * described


def sections(toks, threshold=2):
    melodic = lambda t: t[0].isupper()
    sep_like = lambda t: not melodic(t) or t[0] == "X"
    lo, hi = 0, len(toks)
    while lo < hi and not melodic(toks[lo]):
        lo += 1
    while hi > lo and not melodic(toks[hi - 1]):
        hi -= 1
    result, current, k = [], [], lo
    while k < hi:
        if sep_like(toks[k]):
            j = k
            while j < hi and sep_like(toks[j]):
                j += 1
            run = toks[k:j]
            if sum(n for _, n in run) > threshold:
                if current:
                    result.append(current)
                current = []
            else:
                current.extend(run)
            k = j
        else:
            current.append(toks[k])
            k += 1
    if current:
        result.append(current)
    return " | ".join("".join(f"{l}{n}" for l, n in s) for s in result)


def main():
    musan, songs, scratch = sys.argv[1:4]
    out = pathlib.Path(scratch) / "reports"
    subprocess.run([musan, "batch", songs, "--out", str(out)], check=True, stdout=subprocess.DEVNULL)
    manifest = json.loads((out / "manifest.json").read_text())
    failures = 0
    checked = 0
    for entry in manifest["songs"]:
        if entry["status"] != "ok":
            continue
        report = json.loads((out / entry["report"]).read_text())
        toks = tokens(report["structure"])
        problems = []
        if sum(n for _, n in toks) != len(report["song"]["measures"]):
            problems.append("structure does not tile the song")
        if abs(sdl(toks) - report["sdl"]) > 1e-9:
            problems.append(f"sdl {report['sdl']} != {sdl(toks)}")
        if sections(toks) != report["sections_text"]:
            problems.append(f"sections {report['sections_text']!r} != {sections(toks)!r}")
        checked += 1
        for p in problems:
            failures += 1
            print(f"{entry['input']}: {p}")
    print(f"checked {checked} reports, {failures} problems")
    return 1 if failures or checked == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
