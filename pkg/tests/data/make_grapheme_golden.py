"""Regenerate devanagari_graphemes.tsv with the `regex` module's \\X matcher.

The golden file is produced by a segmenter independent of devseq and is
checked in; rerun only when deliberately moving to a new Unicode revision.
Format: ``input<TAB>cluster|cluster|...<TAB>note``.
"""

from pathlib import Path

import regex

CASES = [
    ("नेपाल", "word from the grapheme example"),
    ("क", "bare consonant"),
    ("का", "consonant + aa sign"),
    ("कि", "consonant + i sign"),
    ("की", "consonant + ii sign"),
    ("कु", "consonant + u sign"),
    ("कू", "consonant + uu sign"),
    ("के", "consonant + e sign"),
    ("कै", "consonant + ai sign"),
    ("को", "consonant + o sign"),
    ("कौ", "consonant + au sign"),
    ("कृ", "consonant + vocalic r sign"),
    ("कं", "consonant + anusvara"),
    ("कँ", "consonant + candrabindu"),
    ("कः", "consonant + visarga"),
    ("छौं", "consonant + au sign + anusvara"),
    ("सँग", "candrabindu inside word"),
    ("क्", "consonant + virama, word final"),
    ("क्ष", "conjunct ksha"),
    ("त्र", "conjunct tra"),
    ("ज्ञ", "conjunct jnya"),
    ("श्र", "conjunct shra"),
    ("स्ते", "conjunct + vowel sign"),
    ("नमस्ते", "word with conjunct"),
    ("राष्ट्रिय", "double conjunct + i sign"),
    ("स्त्र", "three-consonant conjunct"),
    ("र्क", "reph"),
    ("धर्म", "reph inside word"),
    ("क्‍ष", "virama + ZWJ conjunct"),
    ("क्‌ष", "virama + ZWNJ"),
    ("क़", "consonant + nukta"),
    ("ज़्य", "nukta consonant in conjunct"),
    ("अ", "independent vowel"),
    ("आमा", "independent vowel word"),
    ("ई", "independent ii"),
    ("ओं", "independent o + anusvara"),
    ("ॐ", "om sign"),
    ("१२३", "Devanagari digits"),
    ("।", "danda"),
    ("॥", "double danda"),
    ("नेपालको", "word + post-position"),
    ("काठमाडौं", "place name"),
    ("विश्वविद्यालय", "long word with conjuncts"),
    ("प्रधानमन्त्री", "multiple conjuncts"),
    ("हिन्दी", "i sign after consonant"),
    ("क्षेत्र", "conjunct + e sign + conjunct"),
    ("a्", "virama on Latin base"),
    ("्क", "leading virama"),
    ("कि ख", "space between clusters"),
    ("राम, सीता.", "punctuation"),
]


def main() -> None:
    out = Path(__file__).with_name("devanagari_graphemes.tsv")
    lines = []
    for text, note in CASES:
        clusters = regex.findall(r"\X", text)
        lines.append(f"{text}\t{'|'.join(clusters)}\t{note}")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} cases to {out}")


if __name__ == "__main__":
    main()
