"""Pinned constants for grapheme-cluster segmentation.

Boundary rules follow UAX #29 as revised for Unicode 15.1 and later, which
added GB9c (Indic conjunct break): a consonant, one or more viramas
(optionally mixed with extending marks) and a following consonant stay in
one cluster. Character properties are read from the ``regex`` module's
Unicode database; the version below is what the tests were frozen against.
"""

RULE_REVISION = "UAX29-15.1+GB9c"
PROPERTY_UNICODE_VERSION = "17.0.0"

# Grapheme_Cluster_Break values, in the order they are probed.
GCB_VALUES = (
    "CR",
    "LF",
    "Control",
    "Extend",
    "ZWJ",
    "Regional_Indicator",
    "Prepend",
    "SpacingMark",
    "L",
    "V",
    "T",
    "LV",
    "LVT",
)

# Indic_Conjunct_Break values that take part in GB9c.
INCB_VALUES = ("Consonant", "Linker", "Extend")

VIRAMA = "्"
