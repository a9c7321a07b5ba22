# Copyright 2026 The qaprobe Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent Python reference for the tokenizer, mock model and scorer.

Used offline to compute the frozen expectations in the C++ tests and to
design the fixtures under tests/data. Nothing here is imported by the build.
"""

import collections
import json
import sys
import unicodedata


def is_punct(ch):
    return unicodedata.category(ch).startswith("P")


def tokenize(text):
    """Returns (token, start, end) triples with code point offsets."""
    out = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        lo, hi = i, j
        while lo < hi and is_punct(text[lo]):
            out.append((text[lo], lo, lo + 1))
            lo += 1
        t = hi
        while t > lo and is_punct(text[t - 1]):
            t -= 1
        if lo < t:
            out.append((text[lo:t], lo, t))
        for p in range(t, hi):
            out.append((text[p], p, p + 1))
        i = j
    return out


def normalize(s):
    s = s.lower()
    s = "".join(ch for ch in s if not is_punct(ch))
    words = [w for w in s.split() if w not in ("a", "an", "the")]
    return " ".join(words)


def f1_single(pred, gold):
    p, g = normalize(pred).split(), normalize(gold).split()
    if not p or not g:
        return float(p == g)
    common = sum((collections.Counter(p) & collections.Counter(g)).values())
    if common == 0:
        return 0.0
    prec, rec = common / len(p), common / len(g)
    return 2 * prec * rec / (prec + rec)


def evaluate(pred, golds, impossible):
    if impossible:
        v = int(normalize(pred) == "")
        return v, float(v)
    golds = golds or [""]
    em = int(any(normalize(pred) == normalize(g) for g in golds))
    f1 = max(f1_single(pred, g) for g in golds)
    return em, f1


def mock_predict(context, question):
    ctx = [t[0] for t in tokenize(context)]
    q = [t[0] for t in tokenize(question)]
    cl = [t.lower() for t in ctx]
    ql = [t.lower() for t in q]
    qs, cs = set(ql), set(cl)
    n = len(ctx)
    hit = [1 if t in qs else 0 for t in cl]
    start = [float(sum(hit[i:i + 3])) for i in range(n)]
    end = [float(sum(hit[max(0, j - 2):j + 1])) for j in range(n)]
    att = []
    for i in range(n):
        row = [1.0 if cl[i] == ql[j] else 0.01 for j in range(len(q))]
        s = sum(row)
        att.append([v / s for v in row])
    matched = sum(1 for t in ql if t in cs)
    frac = matched / len(q) if q else 0.0
    na = min(1.0, max(0.0, 1.0 - frac))
    out = {"ctx_tokens": ctx, "q_tokens": q, "start_scores": start, "end_scores": end,
           "attention": att, "no_answer_prob": na, "span": None, "answer_text": ""}
    if n == 0 or na > 0.5:
        return out
    best, best_s = None, -1.0
    for i in range(n):
        for j in range(i, min(n, i + 4)):
            s = start[i] + end[j]
            if s > best_s:
                best_s, best = s, (i, j)
    out["span"] = {"start": best[0], "end": best[1]}
    out["answer_text"] = " ".join(ctx[best[0]:best[1] + 1])
    return out


def report(dataset_path):
    data = json.load(open(dataset_path))
    for art in data["data"]:
        for par in art["paragraphs"]:
            for qa in par["qas"]:
                out = mock_predict(par["context"], qa["question"])
                golds = [a["text"] for a in qa["answers"]]
                em, f1 = evaluate(out["answer_text"], golds, qa.get("is_impossible", False))
                print(json.dumps({"id": qa["id"], "pred": out["answer_text"], "span": out["span"],
                                  "no_answer_prob": out["no_answer_prob"], "em": em, "f1": f1}))


if __name__ == "__main__":
    report(sys.argv[1])
