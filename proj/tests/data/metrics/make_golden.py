"""Regenerates golden.json from the reference scorer (sacrebleu 2.x).

Run once; the C++ tests only read the frozen output.
    python3 make_golden.py
"""
import json
import pathlib

import sacrebleu
from sacrebleu.metrics import BLEU, CHRF
from sacrebleu.tokenizers.tokenizer_13a import Tokenizer13a

HERE = pathlib.Path(__file__).parent


def read_lines(name):
    return (HERE / name).read_text(encoding="utf-8").split("\n")[:-1]


hyps = read_lines("hyp.txt")
refs = read_lines("ref.txt")
assert len(hyps) == len(refs) == 50

# Second reference stream: drop the first word of every reference so that
# closest-length selection and multi-reference clipping are exercised.
refs2 = [" ".join(r.split()[1:]) or r for r in refs]
(HERE / "ref2.txt").write_text("\n".join(refs2) + "\n", encoding="utf-8")

tok = Tokenizer13a()
token_cases = [
    "Hello, world!", "3.5", "", "a.,b", "1,000.5 and 2,5", "end.", "x-\ny",
    "&quot;hi&quot; &amp; &lt;b&gt;", "<skipped>ok", "Hello,world", "U.S.A.",
    "(test) [x] {y}", "10-20 km", "a—b", "‘quoted’",
    "tab\there", "a b", "Ціна: 12,5% (за рік).", "it's e-mail",
    "  leading and trailing  ", "$100/month", "7:45", "x.5", "5.x", "..."
]

bleu_none = BLEU(smooth_method="none")
bleu_exp = BLEU()
chrf = CHRF()
chrfpp = CHRF(word_order=2)

def bleu_dict(s):
    return {"score": s.score, "precisions": s.precisions, "bp": s.bp,
            "sys_len": s.sys_len, "ref_len": s.ref_len,
            "counts": s.counts, "totals": s.totals}

golden = {
    "tokenize_13a": [{"text": t, "tokens": tok(t.rstrip()).split()} for t in token_cases],
    "corpus_bleu": bleu_dict(bleu_none.corpus_score(hyps, [refs])),
    "corpus_bleu_exp": bleu_dict(bleu_exp.corpus_score(hyps, [refs])),
    "corpus_bleu_multi": bleu_dict(bleu_none.corpus_score(hyps, [refs, refs2])),
    "corpus_chrf": chrf.corpus_score(hyps, [refs]).score,
    "corpus_chrfpp": chrfpp.corpus_score(hyps, [refs]).score,
    "corpus_chrf_multi": chrf.corpus_score(hyps, [refs, refs2]).score,
    "corpus_chrfpp_multi": chrfpp.corpus_score(hyps, [refs, refs2]).score,
    "sentence_bleu": [sacrebleu.sentence_bleu(h, [r]).score for h, r in zip(hyps, refs)],
    "sentence_bleu_multi": [sacrebleu.sentence_bleu(h, [r, r2]).score
                            for h, r, r2 in zip(hyps, refs, refs2)],
    "sentence_chrf": [sacrebleu.sentence_chrf(h, [r]).score for h, r in zip(hyps, refs)],
    "sentence_chrfpp": [sacrebleu.sentence_chrf(h, [r], word_order=2).score
                        for h, r in zip(hyps, refs)],
}

# Oracle fixture: per-hypothesis sentence BLEU plus oracle/baseline corpus BLEU.
nbest = [json.loads(l) for l in (HERE.parent / "oracle" / "nbest.jsonl").read_text(encoding="utf-8").splitlines()]
orefs = (HERE.parent / "oracle" / "ref.txt").read_text(encoding="utf-8").splitlines()
per_hyp, oracle_sel, base_sel = [], [], []
for lst in nbest:
    ref = orefs[lst["id"]]
    scores = [sacrebleu.sentence_bleu(h["text"], [ref]).score for h in lst["hypotheses"]]
    per_hyp.append(scores)
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    base = max(range(len(scores)), key=lambda i: (lst["hypotheses"][i]["score"], -i))
    oracle_sel.append(best)
    base_sel.append(base)
golden["oracle"] = {
    "sentence_bleu": per_hyp,
    "oracle_index": oracle_sel,
    "baseline_index": base_sel,
    "oracle_corpus_bleu": bleu_none.corpus_score(
        [l["hypotheses"][i]["text"] for l, i in zip(nbest, oracle_sel)], [orefs]).score,
    "baseline_corpus_bleu": bleu_none.corpus_score(
        [l["hypotheses"][i]["text"] for l, i in zip(nbest, base_sel)], [orefs]).score,
}

(HERE / "golden.json").write_text(json.dumps(golden, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
print("wrote golden.json")
