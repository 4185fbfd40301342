"""Synthetic pro-drop parallel corpus with known dropped pronouns.

The source side is a toy pro-drop language written with Chinese words, the
target side a toy English.  Every sentence comes from a template whose
pronoun slots are filled in one of three ways:

``subj``
    a subject pronoun whose identity depends on the verb (each verb has its
    own preference over persons; some preferences are sharp, some are not);
``anaph``
    a pronoun referring back to a noun earlier in the sentence
    (person -> 他/她, thing -> 它), fully recoverable from context;
``dummy``
    the expletive 它 / "it".

Each source pronoun is then dropped independently with ``drop_rate``.  The
target keeps every pronoun, so the gold labelled source is the undropped one.
"""

from dataclasses import dataclass, field

from .rng import XorShift64Star

PRONOUNS = {
    # source: (subject form, object form)
    "我": ("i", "me"),
    "你": ("you", "you"),
    "他": ("he", "him"),
    "她": ("she", "her"),
    "它": ("it", "it"),
    "我们": ("we", "us"),
}

CATEGORIES = {
    "MALE": {"小明": "ming", "大卫": "david", "老王": "wang"},
    "FEMALE": {"小红": "hong", "玛丽": "mary", "小丽": "lily"},
    "THING": {"面包": "bread", "书": "book", "车": "car", "手机": "phone", "咖啡": "coffee", "戒指": "ring"},
    "VT": {"喜欢": "like", "买": "buy", "找": "find", "烤": "bake", "看": "watch", "带": "bring",
           "卖": "sell", "修": "fix"},
    "VI": {"来": "come", "走": "leave", "睡": "sleep", "哭": "cry", "笑": "laugh", "跑": "run"},
    "ADJ": {"好": "good", "贵": "expensive", "坏": "broken", "严重": "serious", "美味": "tasty", "新": "new"},
    "TIME": {"今天": "today", "明天": "tomorrow", "昨天": "yesterday"},
    "DEG": {"很": "very", "真": "really"},
    "MISC": {"吗": "?", "不": "not", "想": "want", "会": "will", "和": "and", "也": "also", "已经": "already"},
}
CATEGORIES["PERSON"] = {**CATEGORIES["MALE"], **CATEGORIES["FEMALE"]}

_SUBJECTS = ("我", "你", "他", "她", "我们")


def _pref(top, second=None, third=None):
    """Subject preference: one sharp favourite, or a flat three-way spread."""
    if second is None:
        w = {p: 0.05 for p in _SUBJECTS}
        w[top] = 0.8
        return w
    w = {p: 0.0 for p in _SUBJECTS}
    w[top], w[second], w[third] = 0.4, 0.35, 0.25
    return w


SUBJECT_BIAS = {
    "喜欢": _pref("我"), "买": _pref("你"), "找": _pref("他"), "烤": _pref("她"), "看": _pref("我们"),
    "带": _pref("我", "你", "他"), "卖": _pref("他", "她", "我们"), "修": _pref("我们", "我", "她"),
    "来": _pref("我"), "走": _pref("他"), "睡": _pref("你"), "哭": _pref("她"),
    "笑": _pref("我", "你", "我们"), "跑": _pref("他", "她", "我"),
}


@dataclass(frozen=True)
class Template:
    src: str
    tgt: str
    slots: dict


def T(src, tgt, **slots):
    return Template(src, tgt, slots)


TEMPLATES = (
    T("$T $S $V", "$T $S $V", T="TIME", V="VI", S=("subj", "V")),
    T("$S 想 $V $N", "$S want to $V the $N", V="VT", N="THING", S=("subj", "V")),
    T("$S 不 $V", "$S do not $V", V="VI", S=("subj", "V")),
    T("$S 会 $V $P", "$S will $V $P", V="VT", P="PERSON", S=("subj", "V")),
    T("$N 很 $J $S $V $A 吗", "the $N is very $J did $S $V $A ?", N="THING", J="ADJ", V="VT",
      S=("subj", "V"), A=("anaph", "N", 1)),
    T("$D 真 不 $J", "$D is really not $J", J="ADJ", D=("dummy",)),
    T("$P $T $V $A 也 $W", "$P $T $V and $A also $W", P="PERSON", T="TIME", V="VI", W="VI",
      A=("anaph", "P", 0)),
    T("$S 想 $V", "$S want to $V", V="VI", S=("subj", "V")),
    T("$P 想 $V $N $A 会 $W $B", "$P want to $V the $N $A will $W $B", P="PERSON", V="VT", N="THING",
      W="VT", A=("anaph", "P", 0), B=("anaph", "N", 1)),
    T("$T $S 和 $P $V", "$T $S and $P $V", T="TIME", P="PERSON", V="VI", S=("subj", "V")),
    T("$S 不 想 $V $N", "$S do not want to $V the $N", V="VT", N="THING", S=("subj", "V")),
    T("$N 真 $J $S 想 $V $A", "the $N is really $J $S want to $V $A", N="THING", J="ADJ", V="VT",
      S=("subj", "V"), A=("anaph", "N", 1)),
    T("$S 已经 $V $N", "$S already $V the $N", V="VT", N="THING", S=("subj", "V")),
    T("$D 很 $J 吗", "is $D very $J ?", J="ADJ", D=("dummy",)),
    T("$P $V $N $S 也 $W $A", "$P $V the $N and $S also $W $A", P="PERSON", V="VT", N="THING", W="VT",
      S=("subj", "W"), A=("anaph", "N", 1)),
    T("$S 明天 会 $V", "$S will $V tomorrow", V="VI", S=("subj", "V")),
    T("$T $S 会 $V $N 吗", "$T will $S $V the $N ?", T="TIME", V="VT", N="THING", S=("subj", "V")),
    T("$P 很 $J $S $V $A 吗", "$P is very $J did $S $V $A ?", P="PERSON", J="ADJ", V="VT",
      S=("subj", "V"), A=("anaph", "P", 1)),
    T("$S $T 不 $V", "$S $T do not $V", T="TIME", V="VI", S=("subj", "V")),
    T("$D 已经 $J", "$D is already $J", J="ADJ", D=("dummy",)),
)


@dataclass
class SynthGrammar:
    categories: dict = field(default_factory=lambda: CATEGORIES)
    pronouns: dict = field(default_factory=lambda: PRONOUNS)
    subject_bias: dict = field(default_factory=lambda: SUBJECT_BIAS)
    templates: tuple = TEMPLATES
    drop_rate: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.drop_rate <= 1.0:
            raise ValueError("drop_rate must be in [0, 1]")
        if not self.templates:
            raise ValueError("grammar has no templates")
        targets = {}
        for cat, words in self.categories.items():
            if cat == "PERSON":
                continue
            for s, t in words.items():
                if targets.setdefault(s, t) != t:
                    raise ValueError(f"dictionary maps {s!r} twice")
        if len(set(targets.values())) != len(targets):
            raise ValueError("dictionary is not injective")

    @property
    def dictionary(self):
        d = {}
        for cat, words in self.categories.items():
            d.update(words)
        return d

    @property
    def source_pronouns(self):
        return list(self.pronouns)

    @property
    def target_pronouns(self):
        out = []
        for forms in self.pronouns.values():
            for f in forms:
                if f not in out:
                    out.append(f)
        return out

    def lexicon(self):
        """Gold target-pronoun -> [(source pronoun, 1.0)] map."""
        lex = {}
        for src, forms in self.pronouns.items():
            for f in forms:
                lex.setdefault(f, [(src, 1.0)])
        return lex


@dataclass
class SynthPair:
    """One generated sentence pair with its ground truth.

    ``links`` are (source index in ``x``, target index) pairs.  ``drops``
    holds ``(gap, source pronoun, target index)`` with ``gap`` the insertion
    position in ``x``.  ``slots`` counts pronoun slots before dropping.
    """

    x: list
    y: list
    x_hat: list
    links: list
    drops: list
    slots: int
    template: int


_THING_PRONOUN = "它"


def _referent_pronoun(word, categories):
    if word in categories["MALE"]:
        return "他"
    if word in categories["FEMALE"]:
        return "她"
    return _THING_PRONOUN


def _fill(template, grammar, rng):
    values = {}
    pron_slots = {}
    cats = grammar.categories
    # plain categories first, pronouns may depend on them
    for name, spec in template.slots.items():
        if isinstance(spec, str):
            values[name] = rng.choice(list(cats[spec]))
    for name, spec in template.slots.items():
        if isinstance(spec, str):
            continue
        kind = spec[0]
        if kind == "subj":
            bias = grammar.subject_bias[values[spec[1]]]
            items = list(bias)
            src = rng.weighted(items, [bias[p] for p in items])
            case = 0
        elif kind == "anaph":
            src = _referent_pronoun(values[spec[1]], cats)
            case = spec[2]
        elif kind == "dummy":
            src, case = _THING_PRONOUN, 0
        else:
            raise ValueError(f"unknown slot kind {kind!r}")
        values[name] = src
        pron_slots[name] = case
    return values, pron_slots


def generate_pair(template, index, grammar, rng):
    dictionary = grammar.dictionary
    values, pron_slots = _fill(template, grammar, rng)
    src_items = template.src.split()
    tgt_items = template.tgt.split()

    src_tokens, src_keys = [], []
    for item in src_items:
        if item.startswith("$"):
            src_tokens.append(values[item[1:]])
            src_keys.append(item[1:])
        else:
            src_tokens.append(item)
            src_keys.append(None)
    tgt_tokens, tgt_keys = [], []
    for item in tgt_items:
        if item.startswith("$"):
            name = item[1:]
            if name in pron_slots:
                tgt_tokens.append(grammar.pronouns[values[name]][pron_slots[name]])
            else:
                tgt_tokens.append(dictionary[values[name]])
            tgt_keys.append(name)
        else:
            tgt_tokens.append(item)
            tgt_keys.append(None)

    full_links = []
    used_t = set()
    for i, key in enumerate(src_keys):
        if key is not None:
            j = tgt_keys.index(key)
        else:
            want = dictionary[src_tokens[i]]
            j = next(j for j, t in enumerate(tgt_tokens) if t == want and tgt_keys[j] is None and j not in used_t)
        used_t.add(j)
        full_links.append((i, j))

    dropped = set()
    for i, key in enumerate(src_keys):
        if key in pron_slots and rng.random() < grammar.drop_rate:
            dropped.add(i)

    new_index = {}
    x = []
    drops = []
    for i, tok in enumerate(src_tokens):
        if i in dropped:
            j = next(t for s, t in full_links if s == i)
            drops.append((len(x), tok, j))
        else:
            new_index[i] = len(x)
            x.append(tok)
    links = sorted((new_index[i], j) for i, j in full_links if i not in dropped)
    return SynthPair(x, tgt_tokens, src_tokens, links, drops, len(pron_slots), index)


def synth_corpus(grammar, n):
    """Generate ``n`` pairs; identical output for identical grammar and ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not grammar.templates:
        raise ValueError("grammar has no templates")
    rng = XorShift64Star(grammar.seed)
    out = []
    for _ in range(n):
        k = rng.below(len(grammar.templates))
        out.append(generate_pair(grammar.templates[k], k, grammar, rng))
    return out


def drop_log(pairs):
    """Flat drop log: (sentence index, gap, source pronoun, target index)."""
    return [(n, gap, tok, j) for n, p in enumerate(pairs) for gap, tok, j in p.drops]
