"""
Markup for termweb

Documents as immutable term trees, the sugar table that expands into them,
the HTML/XML codec and slot templates.
"""

# Term model
from .model import (
    Comment,
    Declaration,
    Element,
    Environment,
    Flag,
    Pair,
    Raw,
    Sequence,
    Slot,
    SlotRef,
    Sugar,
    Text,
    as_term,
    bind_slot,
    el,
    env,
    new_slot,
    normalize,
    seq,
    term_equal,
    text,
)

# Sugar expansion and the term-notation bridge
from .sugar import (
    ExpansionRegistry,
    ExpansionRule,
    expand,
    markup_to_term,
    prolog_term_text,
    register_expansion,
    term_to_markup,
)

# Codec
from .codec import Dialect, parse, render, render_to_stream

# Templates
from .template import TemplateDict, file_to_string, fill, parse_template

__all__ = [
    # Term model
    'Comment',
    'Declaration',
    'Element',
    'Environment',
    'Flag',
    'Pair',
    'Raw',
    'Sequence',
    'Slot',
    'SlotRef',
    'Sugar',
    'Text',
    'as_term',
    'bind_slot',
    'el',
    'env',
    'new_slot',
    'normalize',
    'seq',
    'term_equal',
    'text',

    # Sugar
    'ExpansionRegistry',
    'ExpansionRule',
    'expand',
    'markup_to_term',
    'prolog_term_text',
    'register_expansion',
    'term_to_markup',

    # Codec
    'Dialect',
    'parse',
    'render',
    'render_to_stream',

    # Templates
    'TemplateDict',
    'file_to_string',
    'fill',
    'parse_template',
]
