#!/usr/bin/env python3
"""Regenerate the committed test fixtures.

Deterministic: same script, same outputs. Run from the repo root:

    PYTHONPATH=src python3 scripts/make_fixtures.py

Writes the 50-record synthetic corpus, its code/description vector
stores, the hand-built whitening golden and the prompt goldens under
tests/fixtures/.
"""

from __future__ import annotations

import json
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from vulnsev.codeparse import parse_to_ast_sequence  # noqa: E402
from vulnsev.corpus import (  # noqa: E402
    VulnerabilityRecord,
    save_dataset,
    severity_from_score,
)
from vulnsev.embedstore import build_store, save_vectors  # noqa: E402
from vulnsev.prompting import build_prompt  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"

# -- corpus -----------------------------------------------------------------

CODE_TEMPLATES = [
    """void copy_@A@(char *dst, const char *src, size_t n) {
    size_t i;
    for (i = 0; i < n; i++) {
        dst[i] = src[i];
    }
}
""",
    """int handle_@A@(char *input) {
    char buf[@N@];
    strcpy(buf, input);
    return process(buf, @N@);
}
""",
    """size_t calc_@A@(size_t count, size_t size) {
    size_t total = count * size;
    if (total < count) {
        return 0;
    }
    return total;
}
""",
    """int reuse_@A@(struct conn *c) {
    free(c->buf);
    c->len = 0;
    return c->buf[0];
}
""",
    """int deref_@A@(int *p, int flag) {
    if (flag) {
        p = 0;
    }
    return *p + @N@;
}
""",
    """void log_@A@(const char *msg) {
    char line[@N@];
    sprintf(line, msg);
    emit_log(line, sizeof(line));
}
""",
    """void fill_@A@(int *arr, int n) {
    int i;
    for (i = 0; i <= n; i++) {
        arr[i] = i * @N@;
    }
}
""",
    """static int counter_@A@ = 0;
int bump_@A@(int delta) {
    counter_@A@ += delta;
    return counter_@A@;
}
""",
    """int lookup_@A@(const int *table, int size, int index) {
    if (index < 0 || index >= size) {
        return -1;
    }
    return table[index];
}
""",
    """int dispatch_@A@(int op, int value) {
    switch (op) {
        case 0:
            return value + @N@;
        case 1:
            return value - @N@;
        default:
            break;
    }
    return 0;
}
""",
    """int scan_@A@(const char *s) {
    int n = 0;
    while (*s) {
        if (*s == ',') {
            n++;
        }
        s++;
    }
    return n;
}
""",
    """char *alloc_@A@(size_t n) {
    char *p = (char *)malloc(n + @N@);
    if (p == 0) {
        return 0;
    }
    memset(p, 0, n);
    return p;
}
""",
    """unsigned long hash_@A@(const char *s) {
    unsigned long h = @N@ul;
    int c;
    while ((c = *s++)) {
        h = ((h << 5) + h) + c;
    }
    return h;
}
""",
    """int clamp_@A@(int v, int lo, int hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}
""",
    """struct node_@A@ { struct node_@A@ *next; int value; };
int length_@A@(struct node_@A@ *head) {
    int n = 0;
    while (head != 0) {
        n++;
        head = head->next;
    }
    return n;
}
""",
    """void release_@A@(char **slot) {
    if (*slot) {
        free(*slot);
    }
    free(*slot);
    *slot = 0;
}
""",
    """unsigned decode_@A@(const unsigned char *b) {
    unsigned v = 0;
    v |= b[0];
    v |= b[1] << 8;
    v |= b[2] << 16;
    return v;
}
""",
    """int verify_@A@(const char *data, int len, int want) {
    int sum = 0;
    int i;
    for (i = 0; i < len; i++) {
        sum += data[i];
    }
    if (sum != want) {
        goto fail;
    }
    return 0;
fail:
    return -1;
}
""",
]

NAMES = [
    "req", "pkt", "img", "tls", "font", "sql", "upload", "sched", "fs", "audio",
    "mime", "dns", "auth", "cache", "frame", "token", "route", "codec", "xml", "cert",
    "quota", "index", "chunk", "queue", "shm", "proc", "vfs", "net", "gpu", "usb",
    "ipc", "acl", "blob", "cfg", "cookie", "csv", "ecc", "epoll", "exec", "fifo",
    "gzip", "hmac", "icmp", "jwt", "ldap", "mmap", "ntp", "oauth", "pdf", "regex",
]

FLAWS = [
    "heap buffer overflow", "use-after-free", "numeric overflow",
    "NULL pointer dereference", "format string flaw", "one-byte overwrite",
    "race condition", "bounds-check bypass", "double free",
    "type confusion flaw",
]

COMPONENTS = [
    "image decoder", "packet parser", "session cache", "TLS handshake",
    "font renderer", "SQL layer", "upload handler", "task scheduler",
    "filesystem driver", "audio codec", "certificate validator",
    "request router",
]

IMPACTS = [
    "remote code execution", "denial of service", "information disclosure",
    "privilege escalation", "memory corruption",
]

DESCRIPTION_SHAPES = [
    "A {flaw} in the {component} allows attackers to cause {impact} via crafted input.",
    "The {component} contains a {flaw} that can lead to {impact} when processing untrusted data.",
    "Due to a {flaw}, remote attackers may trigger {impact} through the {component}.",
    "{component} mishandles edge cases, resulting in a {flaw} and possible {impact}.",
]

SCORES = {
    "Critical": [9.0, 9.1, 9.2, 9.3, 9.4, 9.6, 9.8, 9.8, 9.9, 10.0],
    "High": [7.0, 7.2, 7.3, 7.5, 7.5, 7.8, 8.0, 8.1, 8.2, 8.3, 8.5, 8.6, 8.8, 8.8, 8.9],
    "Medium": [4.0, 4.3, 4.4, 4.7, 4.9, 5.0, 5.3, 5.4, 5.5, 5.9, 6.1, 6.3, 6.5, 6.8, 6.9],
    "Low": [0.1, 1.2, 1.8, 2.1, 2.4, 2.6, 3.0, 3.3, 3.7, 3.9],
}

# Class pattern cycled over records so ids mix severities.
CLASS_PATTERN = [
    "High", "Medium", "Critical", "Low", "High", "Medium", "High", "Low",
    "Medium", "Critical",
]


def make_corpus() -> list[VulnerabilityRecord]:
    taken = {"Critical": 0, "High": 0, "Medium": 0, "Low": 0}
    records = []
    base_date = date(2022, 3, 1)
    for i in range(50):
        label = CLASS_PATTERN[i % len(CLASS_PATTERN)]
        score = SCORES[label][taken[label]]
        taken[label] += 1
        name = NAMES[i]
        template = CODE_TEMPLATES[i % len(CODE_TEMPLATES)]
        code = template.replace("@A@", name).replace("@N@", str(16 + 8 * (i % 7)))
        shape = DESCRIPTION_SHAPES[i % len(DESCRIPTION_SHAPES)]
        description = shape.format(
            flaw=FLAWS[i % len(FLAWS)],
            component=COMPONENTS[i % len(COMPONENTS)],
            impact=IMPACTS[i % len(IMPACTS)],
        )
        collected = None if i % 11 == 7 else base_date + timedelta(days=17 * i)
        records.append(
            VulnerabilityRecord(
                id=f"vuln-{i + 1:04d}",
                cve_id=f"CVE-2023-{10001 + i}",
                code=code,
                description=description,
                cvss_score=score,
                severity=severity_from_score(score),
                collected_at=collected,
            )
        )
    return records


def make_vectors(records) -> None:
    rng = np.random.RandomState(20240501)
    code_vecs = {r.id: rng.normal(size=16).astype(np.float32) for r in records}
    desc_vecs = {r.id: rng.normal(size=12).astype(np.float32) for r in records}
    save_vectors(build_store(code_vecs, kind="code"), FIXTURES / "fixture_code.vec")
    save_vectors(build_store(desc_vecs, kind="description"), FIXTURES / "fixture_desc.vec")


def make_whitening_golden() -> None:
    # Hand-built model; expected output computed with plain matrix math,
    # independent of the library's whitening code.
    mean = np.array([0.5, -1.0, 2.0, 0.0])
    projection = np.array(
        [
            [1.0, 0.5],
            [0.0, -1.0],
            [2.0, 0.25],
            [-0.5, 0.0],
        ]
    )
    x = np.array([1.0, 2.0, -1.0, 3.0])
    expected = (x - mean) @ projection
    payload = {
        "model": {
            "source_dim": 4,
            "target_dim": 2,
            "mean": mean.tolist(),
            "projection": projection.tolist(),
        },
        "input": x.tolist(),
        "expected": expected.tolist(),
    }
    (FIXTURES / "golden_whitening.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def make_ast_golden() -> None:
    seq = parse_to_ast_sequence("int main(){return 0;}")
    (FIXTURES / "golden_ast_main.txt").write_text(
        "\n".join(seq.items) + "\n", encoding="utf-8"
    )


def make_prompt_goldens(records) -> None:
    by_id = {r.id: r for r in records}
    target = by_id["vuln-0050"]
    demos = [by_id[f"vuln-{i:04d}"] for i in (10, 20, 30, 40)]
    four_shot = build_prompt(demos, target, budget=32000)
    zero_shot = build_prompt([], target, budget=32000)
    (FIXTURES / "golden_prompt_4shot.txt").write_text(
        four_shot.full_text, encoding="utf-8"
    )
    (FIXTURES / "golden_prompt_zero_shot.txt").write_text(
        zero_shot.full_text, encoding="utf-8"
    )


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    records = make_corpus()
    for record in records:
        parse_to_ast_sequence(record.code)  # every fixture must be parseable
    save_dataset(records, FIXTURES / "fixture_corpus.jsonl")
    make_vectors(records)
    make_whitening_golden()
    make_ast_golden()
    make_prompt_goldens(records)
    print(f"wrote fixtures under {FIXTURES}")


if __name__ == "__main__":
    main()
