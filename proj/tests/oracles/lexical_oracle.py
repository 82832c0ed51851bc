"""Independent re-derivation of the lexical alignment cell for the name and number
perturbation fixtures used in the C++ tests. Prints repr() of each float so the values can be
frozen into the tests verbatim."""
import string
import unicodedata
from collections import Counter

PUNCT = set(string.punctuation) | set("‘’“”–—…«»")


def is_punct(ch):
    return ch in PUNCT or unicodedata.category(ch).startswith("P")


def tokenize(text):
    out = []
    for piece in text.split():
        lead, trail = [], []
        while piece and is_punct(piece[0]):
            lead.append(piece[0])
            piece = piece[1:]
        while piece and is_punct(piece[-1]):
            trail.insert(0, piece[-1])
            piece = piece[:-1]
        out += lead + ([piece] if piece else []) + trail
    return out


def content(tokens):
    return [t for t in tokens if not all(is_punct(c) for c in t)]


def f1(s, c):
    if not s and not c:
        return 1.0
    if not s or not c:
        return 0.0
    overlap = sum((Counter(s) & Counter(c)).values())
    return 2.0 * overlap / (len(s) + len(c))


def is_entity_shape(tok):
    return any(ch.isdigit() for ch in tok) or tok[:1].isupper()


def entity_tokens(sentences):
    per = [content(tokenize(s)) for s in sentences]
    mid_caps = {t for toks in per for t in toks[1:] if t[:1].isupper()}
    result = []
    for toks in per:
        ents = []
        for i, t in enumerate(toks):
            if not is_entity_shape(t):
                continue
            if i == 0 and not any(ch.isdigit() for ch in t) and t not in mid_caps:
                continue
            ents.append(t.lower())
        result.append(ents)
    return result


def cell(sentence, chunk, all_sentences=None):
    sents = all_sentences or [sentence]
    s = [t.lower() for t in content(tokenize(sentence))]
    c = [t.lower() for t in content(tokenize(chunk))]
    a = f1(s, c)
    ents = entity_tokens(sents)[sents.index(sentence)]
    cset = set(c)
    ratio = (sum(1 for e in ents if e not in cset) / len(ents)) if ents else 0.0
    r = 1.0 - a
    pc = r * ratio
    return a, r - pc, pc, ents


NAP_CTX = "Napoleon married the Archduchess Marie Louise, who was 18 years old."
NAP_ORIG = "Archduchess Marie Louise was 18 years old when she married Napoleon ."
NAP_PERT = "Archduchess Mari Louze was 18 years old when she married Napoleon ."
BR_CTX = "The Blue Ridge Mountains attain elevations of about 2,000 ft."
BR_ORIG = "The typical elevations of the Blue Ridge Mountains are 2,000 ft."
BR_PERT = "The typical elevations of the Blue Ridge Mountains are 2000 ft."

if __name__ == "__main__":
    for name, ctx, claim in [("nap_orig", NAP_CTX, NAP_ORIG), ("nap_pert", NAP_CTX, NAP_PERT),
                             ("br_orig", BR_CTX, BR_ORIG), ("br_pert", BR_CTX, BR_PERT)]:
        a, n, c, ents = cell(claim, ctx)
        print(name, repr(a), repr(n), repr(c), ents)
