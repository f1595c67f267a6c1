"""
Tests for the sugar table: built-in structures, user rules and the bridge
between markup and term notation.
"""
import random
import threading

import pytest

from termweb.errors import ExpansionDepthExceeded, MalformedSugar, ReservedHead
from termweb.markup.codec import render
from termweb.markup.model import (
    Comment, Declaration, Element, Flag, Pair, Raw, Sequence, Sugar, el, env, new_slot, normalize, seq, text,
)
from termweb.markup.sugar import (
    CGI_REPLY_TEXT, ExpansionRegistry, ExpansionRule, begin, cgi_reply, checkbox, comment, declare, description,
    end, end_form, entity, enumerate_, expand, heading, image, input_, itemize, label, linebreak, markup_to_term,
    menu, nice_itemize, nl, option, parbreak, pr, preformatted, prolog_term, radio, ref, rule, selected, start,
    start_form, sugar, term_to_markup, textinput, verbatim,
)
from termweb.settings import Settings
from termweb.terms import PLACEHOLDER, Atom, Compound, parse_term_text


@pytest.fixture
def registry():
    return ExpansionRegistry(Settings(bullet_image="/img/dot.gif", pr_logo="/img/logo.gif",
                                      pr_manual_url="/manual.html", expansion_depth=8))


def expanded(term, registry):
    return normalize(registry.expand(term))


class TestBuiltins:
    def test_breaks_and_rules(self, registry):
        assert expanded(rule(), registry) == Element(name="hr")
        assert expanded(linebreak(), registry) == Element(name="br")
        assert expanded(parbreak(), registry) == Element(name="p")
        assert expanded(nl(), registry) == text("\n")

    def test_comment_and_declaration(self, registry):
        assert expanded(comment("generated"), registry) == Comment(content="generated")
        assert expanded(declare("DOCTYPE html"), registry) == Declaration(content="DOCTYPE html")

    def test_image(self, registry):
        assert expanded(image("phone.gif"), registry) == el("img", [("src", "phone.gif")])
        assert expanded(image("map.gif", [("alt", "A map"), "ismap"]), registry) == \
            el("img", [("src", "map.gif"), ("alt", "A map"), "ismap"])

    def test_ref_and_label(self, registry):
        assert expanded(ref("http://www.clip.dia.fi.upm.es/", "Clip home"), registry) == \
            env("a", "Clip home", [("href", "http://www.clip.dia.fi.upm.es/")])
        assert expanded(label("top", "Top"), registry) == env("a", "Top", [("name", "top")])

    def test_heading(self, registry):
        assert expanded(heading(2, "Telephone database"), registry) == env("h2", "Telephone database")

    @pytest.mark.parametrize("level", [0, 7, "x", True])
    def test_heading_level_out_of_range(self, registry, level):
        with pytest.raises(MalformedSugar):
            registry.expand(heading(level, "t"))

    def test_lists(self, registry):
        assert expanded(itemize(["a", "b"]), registry) == env("ul", [env("li", "a"), env("li", "b")])
        assert expanded(enumerate_(["a"]), registry) == env("ol", [env("li", "a")])

    def test_description_last_part_is_definition(self, registry):
        result = expanded(description([["CGI", "Common Gateway Interface"], ["t1", "t2", "def"]]), registry)
        assert result == env("dl", [env("dt", "CGI"), env("dd", "Common Gateway Interface"),
                                    env("dt", "t1"), env("dt", "t2"), env("dd", "def")])

    def test_nice_itemize_uses_configured_bullet(self, registry):
        result = expanded(nice_itemize(["x"]), registry)
        bullet = el("img", [("src", "/img/dot.gif"), ("align", "bottom"), ("alt", "*")])
        assert result == env("dl", [env("dd", [bullet, "x"])])
        assert expanded(nice_itemize("b.gif", ["x"]), registry).body[0].body[0].attrs[0] == \
            Pair(name="src", value="b.gif")

    def test_preformatted_joins_lines(self, registry):
        assert expanded(preformatted(["line one", "line two"]), registry) == env("pre", "line one\nline two")

    def test_verbatim_quotes_markup(self, registry):
        assert expanded(verbatim("<b>&</b>"), registry) == Raw(content="&lt;b&gt;&amp;&lt;/b&gt;")
        assert render(verbatim(env("b", "x"))) == "&lt;b&gt;x&lt;/b&gt;"

    def test_prolog_term(self, registry):
        value = Compound("phone", [Atom("daniel"), "336-7448"])
        assert expanded(prolog_term(value), registry) == text('phone(daniel,"336-7448")')

    def test_entity(self, registry):
        assert render(["a", entity("nbsp"), "b", entity("#169")]) == "a&nbsp;b&#169;"
        with pytest.raises(MalformedSugar):
            registry.expand(entity("no spaces"))

    def test_cgi_reply_and_pr(self, registry):
        assert expanded(cgi_reply(), registry) == text(CGI_REPLY_TEXT)
        logo = expanded(pr(), registry)
        assert logo.name == "a" and logo.attrs == (Pair(name="href", value="/manual.html"),)
        assert logo.body[0].attrs[0] == Pair(name="src", value="/img/logo.gif")

    def test_begin_and_end_are_raw_fragments(self, registry):
        assert render([begin("UL", [("compact", "yes")]), "x", end("ul")]) == '<ul compact="yes">x</ul>'

    def test_unknown_structure(self, registry):
        with pytest.raises(MalformedSugar):
            registry.expand(sugar("no_such_thing", 1))


class TestGrouping:
    def test_start_end_become_html_environment(self, registry):
        assert expanded([start(), "body", end()], registry) == Sequence(items=[env("html", "body")])

    def test_unmatched_start_is_raw(self, registry):
        assert render([start(), "open"]) == "<html>open"

    def test_form_grouping(self, registry):
        result = expanded([start_form("/cgi-bin/q"), "x", end_form()], registry)
        assert result == Sequence(items=[env("form", "x", [("method", "POST"), ("action", "/cgi-bin/q")])])

    def test_start_form_defaults(self, registry):
        result = expanded([start_form(), end_form()], registry).items[0]
        assert result.attrs == (Pair(name="method", value="POST"),)
        result = expanded([start_form("/q", [("method", "GET")]), end_form()], registry).items[0]
        assert result.attrs == (Pair(name="action", value="/q"), Pair(name="method", value="GET"))

    def test_nested_groups(self, registry):
        result = expanded([start(), start_form(), "in", end_form(), end()], registry)
        assert result == Sequence(items=[env("html", [env("form", "in", [("method", "POST")])])])


class TestFormStructures:
    def test_checkbox(self, registry):
        assert expanded(checkbox("agree", "on"), registry) == \
            el("input", [("type", "checkbox"), ("name", "agree"), "checked"])
        assert expanded(checkbox("agree", "off"), registry) == el("input", [("type", "checkbox"), ("name", "agree")])

    def test_radio_checked_when_value_selected(self, registry):
        assert Flag(name="checked") in expanded(radio("size", "s", "s"), registry).attrs
        assert Flag(name="checked") not in expanded(radio("size", "s", "m"), registry).attrs

    def test_input(self, registry):
        assert render(input_("text", [("name", "person_name"), ("size", 20)])) == \
            '<input type="text" name="person_name" size="20">'

    def test_textinput_joins_lines(self, registry):
        assert expanded(textinput("c", [("rows", 4)], ["one", "two"]), registry) == \
            env("textarea", "one\ntwo", [("name", "c"), ("rows", "4")])

    def test_option_selects_current_value(self, registry):
        result = expanded(option("colour", "green", ["red", "green"]), registry)
        assert result == env("select", [env("option", "red"), env("option", "green", ["selected"])],
                             [("name", "colour")])

    def test_option_defaults_to_first(self, registry):
        result = expanded(option("colour", "blue", ["red", "green"]), registry)
        assert result.body[0].attrs == (Flag(name="selected"),)

    def test_menu_marks_selected_items(self, registry):
        result = expanded(menu("lang", ["multiple"], ["Prolog", selected("Ciao")]), registry)
        assert result == env("select", [env("option", "Prolog"), env("option", "Ciao", ["selected"])],
                             [("name", "lang"), "multiple"])

    def test_selected_outside_menu(self, registry):
        with pytest.raises(MalformedSugar):
            registry.expand(selected("x"))


class TestUserRules:
    def test_register_and_shadow(self, registry):
        registry.register(ExpansionRule(name="bold", arity=1, rewrite=lambda s: env("b", s.args[0])))
        assert expanded(sugar("bold", "x"), registry) == env("b", "x")
        registry.register(ExpansionRule(name=rule().name, arity=0, rewrite=lambda s: "----"))
        assert expanded(rule(), registry) == text("----")
        registry.unregister(rule().name, 0)
        assert expanded(rule(), registry) == Element(name="hr")

    def test_rules_may_produce_sugar(self, registry):
        registry.register(ExpansionRule(name="title_bar", arity=1,
                                        rewrite=lambda s: [heading(1, s.args[0]), rule()]))
        assert expanded(sugar("title_bar", "T"), registry) == Sequence(items=[env("h1", "T"), el("hr")])

    @pytest.mark.parametrize("name", ["env", "text", "comment", "raw", "declare"])
    def test_reserved_heads(self, registry, name):
        with pytest.raises(ReservedHead):
            registry.register(ExpansionRule(name=name, arity=1, rewrite=lambda s: s))

    def test_depth_limit(self, registry):
        registry.register(ExpansionRule(name="loop", arity=0, rewrite=lambda s: sugar("loop")))
        with pytest.raises(ExpansionDepthExceeded):
            registry.expand(sugar("loop"))

    def test_depth_counts_chains_not_siblings(self, registry):
        many = [heading(1, str(i)) for i in range(50)]
        assert len(expanded(many, registry).items) == 50

    def test_user_rule_disables_grouping(self, registry):
        registry.register(ExpansionRule(name="start", arity=0, rewrite=lambda s: Raw(content="<html lang=en>")))
        assert render([start(), "x", end()], registry=registry) == "<html lang=en>x</html>"

    def test_concurrent_registration(self, registry):
        def add(i):
            registry.register(ExpansionRule(name=f"s{i}", arity=0, rewrite=lambda s, i=i: str(i)))

        threads = [threading.Thread(target=add, args=(i,)) for i in range(32)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert render([sugar(f"s{i}") for i in range(32)], registry=registry) == "".join(map(str, range(32)))

    def test_module_level_expand_uses_default_registry(self):
        assert normalize(expand(rule())) == Element(name="hr")


class TestTermBridge:
    def test_markup_to_term(self):
        page = env("a", ["Clip ", el("br")], [("href", "/"), "x"])
        value = markup_to_term(page)
        assert value == Compound("env", [Atom("a"), [Compound("=", [Atom("href"), "/"]), Atom("x")],
                                         ["Clip ", Compound("$", [Atom("br"), []])]])

    def test_round_trip_through_term(self):
        page = [env("p", ["a", Comment(content="c")], [("class", "k")]), Declaration(content="DOCTYPE html")]
        assert normalize(term_to_markup(markup_to_term(page))) == normalize(page)

    def test_markup_in_term_notation(self):
        value = parse_term_text(r"""[start, title('Telephone database'), heading(2,'Telephone database'), '$',
            start_form("/cgi"), 'Click:', '\\\\', input(text,['='(name,person_name),'='(size,20)]),
            end_form, end]""")
        html = render(term_to_markup(value))
        assert html == ('<html><title>Telephone database</title><h2>Telephone database</h2><p>'
                        '<form method="POST" action="/cgi">Click:<br>'
                        '<input type="text" name="person_name" size="20"></form></html>')

    def test_general_environments(self):
        value = parse_term_text("""address(['='(class,x)],"clip@dia.fi.upm.es")""")
        assert term_to_markup(value) == env("address", "clip@dia.fi.upm.es", [("class", "x")])
        assert term_to_markup(Compound("b", ["zed"])) == env("b", "zed")

    def test_dollar_one_is_selection(self):
        value = Compound("menu", [Atom("lang"), [], ["Prolog", Compound("$", ["Ciao"])]])
        assert render(term_to_markup(value)) == \
            '<select name="lang"><option>Prolog</option><option selected>Ciao</option></select>'

    def test_placeholder_becomes_slot(self):
        markup = term_to_markup([PLACEHOLDER])
        assert not markup.items[0].ref.bound

    def test_unexpanded_sugar_cannot_be_written(self):
        with pytest.raises(MalformedSugar):
            markup_to_term(Sugar(name="start"))


# Terms without sugar -----------------------------------------------------------

def _plain_term(rng, depth):
    kind = rng.randrange(8 if depth < 4 else 5)
    if kind == 0:
        return text("".join(rng.choice("ab <&") for _ in range(rng.randint(0, 5))))
    if kind == 1:
        return Comment(content=rng.choice(["", "c", " note "]))
    if kind == 2:
        return Declaration(content="DOCTYPE html")
    if kind == 3:
        return Raw(content=rng.choice(["<b>", "&nbsp;", "</i>"]))
    if kind == 4:
        if rng.random() < 0.3:
            # unbound slots stay where they are
            return Sequence(items=[new_slot()])
        return el(rng.choice(["br", "hr", "img"]), [("src", "a.gif"), "ismap"][:rng.randint(0, 2)])
    if kind == 5:
        return seq(*[_plain_term(rng, depth + 1) for _ in range(rng.randint(0, 3))])
    return env(rng.choice(["p", "div", "ul", "start", "end_form"]),
               [_plain_term(rng, depth + 1) for _ in range(rng.randint(0, 3))])


@pytest.mark.parametrize("seed", range(20))
def test_expand_leaves_core_markup_unchanged(seed, registry):
    rng = random.Random(seed)
    for _ in range(50):
        term = _plain_term(rng, 1)
        assert registry.expand(term) == term
        assert expand(term) == term
