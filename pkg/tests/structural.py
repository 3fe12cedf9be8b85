"""Text-level checks on emitted monitor source."""

import re

GROWABLE = re.compile(r"\b(Vec|VecDeque|HashMap|BTreeMap|String::with_capacity|vec!)\b")


def memory_fields(source_text: str) -> dict:
    """field -> declared array length, from `struct Memory { ... }`."""
    body = re.search(r"struct Memory \{(.*?)\n\}", source_text, re.S).group(1)
    return {m.group(1): int(m.group(2)) for m in re.finditer(r"(\w+): \[\w+; (\d+)\]", body)}


def growable_outside_ghost(source_text: str) -> list:
    """Lines that mention a growable container, ignoring ghost-only code."""
    bad = []
    in_ghost = False
    depth = 0
    for line in source_text.splitlines():
        if not in_ghost and ("GhostMemory" in line and ("struct" in line or "impl" in line)):
            in_ghost, depth = True, 0
        if in_ghost:
            depth += line.count("{") - line.count("}")
            if depth <= 0 and "}" in line:
                in_ghost = False
            continue
        if "gm." in line or "ghost" in line.lower():
            continue
        if GROWABLE.search(line):
            bad.append(line)
    return bad
