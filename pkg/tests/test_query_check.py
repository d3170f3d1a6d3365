"""Static query validation against a schema."""

from __future__ import annotations

import pytest

from semverlint.errors import (
    DuplicateTagName,
    TagUsedBeforeDefinition,
    TypeMismatch,
    UnknownField,
    UnknownType,
)
from semverlint.query import SNAPSHOT_PAIR_SCHEMA, check_query, parse_query
from semverlint.query.schema import CheckedEdge, CheckedProperty

from helpers.adapters import SINGLE_CRATE_SCHEMA


def check(text: str, schema=SINGLE_CRATE_SCHEMA):
    return check_query(parse_query(text), schema)


def test_checked_query_annotations():
    checked = check(
        """
        {
          Crate {
            item {
              ... on Enum {
                visibility_limit @filter(op: "=", value: ["$public"])
                name @output @tag
                variant @fold @transform(op: "count") @output(name: "variant_count")
                span @optional {
                  filename @output(name: "span_filename")
                  begin_line @output(name: "span_begin_line")
                }
              }
            }
          }
        }
        """
    )
    assert checked.root_type == "Crate"
    assert checked.output_names == (
        "name",
        "variant_count",
        "span_filename",
        "span_begin_line",
    )
    assert checked.parameter_expectations == (("public", "=", "Text"),)
    item = checked.selections[0]
    assert isinstance(item, CheckedEdge) and not item.fold and not item.optional
    enum = item.children[0]
    vis, name, variants, span = enum.children
    assert isinstance(vis, CheckedProperty) and vis.kind == "Text"
    assert name.tag_names == ("name",) and name.output_names == ("name",)
    assert variants.fold and variants.counted
    assert variants.count_output_names == ("variant_count",)
    assert span.optional
    assert span.subtree_output_names == ("span_filename", "span_begin_line")


def test_root_type_must_match_schema():
    with pytest.raises(UnknownType):
        check("{ CrateDiff { baseline { item { name @output } } } }")
    with pytest.raises(UnknownType):
        check("{ Nonsense { item { name @output } } }")
    checked = check_query(
        parse_query("{ CrateDiff { baseline { item { name @output } } } }"),
        SNAPSHOT_PAIR_SCHEMA,
    )
    assert checked.root_type == "CrateDiff"


def test_unknown_field_names_type_and_field():
    with pytest.raises(UnknownField) as excinfo:
        check("{ Crate { item { nam @output } } }")
    assert "Item" in str(excinfo.value) and "nam" in str(excinfo.value)
    # Subtype-only members are invisible before coercion.
    with pytest.raises(UnknownField):
        check("{ Crate { item { variant { name @output } } } }")


def test_coercion_rules():
    check("{ Crate { item { ... on Enum { repr_int @output } } } }")
    check("{ Crate { item { ... on ImplOwner { impl { provenance @output } } } } }")
    with pytest.raises(UnknownType):
        check("{ Crate { item { ... on Enumm { name @output } } } }")
    with pytest.raises(TypeMismatch):
        check("{ Crate { item { ... on Span { filename @output } } } }")
    with pytest.raises(TypeMismatch):
        check(
            "{ Crate { item { ... on Enum { ... on Struct { name @output } } } } }"
        )


def test_property_cannot_nest_or_fold():
    with pytest.raises(TypeMismatch):
        check("{ Crate { item { name { doc_hidden @output } } } }")
    with pytest.raises(TypeMismatch):
        check("{ Crate { item { name @fold } } }")
    with pytest.raises(TypeMismatch):
        check("{ Crate { item { name @optional } } }")


@pytest.mark.parametrize(
    "text",
    [
        # regex needs a Text property
        '{ Crate { item { span { begin_line @filter(op: "regex", value: ["^a"]) } } } }',
        # ordering needs Int
        '{ Crate { item { name @filter(op: ">", value: [3]) } } }',
        # literal kind mismatch
        '{ Crate { item { doc_hidden @filter(op: "=", value: ["x"]) } } }',
        '{ Crate { item { name @filter(op: "=", value: [3]) } } }',
        # one_of operand must be a list of the property kind
        '{ Crate { item { name @filter(op: "one_of", value: [[1, 2]]) } } }',
        '{ Crate { item { name @filter(op: "one_of", value: ["x"]) } } }',
        # contains applies to list-valued properties only
        '{ Crate { item { name @filter(op: "contains", value: ["x"]) } } }',
        # and its operand is an element, not a list
        '{ Crate { item { importable_path { path @filter(op: "contains", value: [["x"]]) } } } }',
    ],
)
def test_filter_type_mismatches(text):
    with pytest.raises(TypeMismatch):
        check(text)


def test_filter_accepts_matching_kinds():
    check('{ Crate { item { name @filter(op: "one_of", value: [["a", "b"]]) } } }')
    check('{ Crate { item { name @filter(op: "one_of", value: [[]]) } } }')
    check('{ Crate { item { importable_path { path @filter(op: "contains", value: ["a"]) } } } }')
    check('{ Crate { item { span { begin_line @filter(op: "<=", value: [10]) } } } }')
    check('{ Crate { item { name @filter(op: "regex", value: ["^[A-Z]"]) } } }')
    check('{ Crate { item { ... on Enum { repr_int @filter(op: "is_null") } } } }')


def test_tag_scope_rules():
    # Forward reference.
    with pytest.raises(TagUsedBeforeDefinition):
        check(
            """
            {
              Crate {
                item {
                  visibility_limit @filter(op: "=", value: ["%n"])
                  name @tag(name: "n")
                }
              }
            }
            """
        )
    # A tag declared inside a fold is not visible after the fold closes.
    with pytest.raises(TagUsedBeforeDefinition):
        check(
            """
            {
              Crate {
                item {
                  importable_path @fold @transform(op: "count") {
                    path @tag(name: "p")
                  }
                  name @filter(op: "=", value: ["%p"])
                }
              }
            }
            """
        )
    # A fold's count tag is not visible inside its own fold: the count does
    # not exist until the fold's bindings have all been produced.
    with pytest.raises(TagUsedBeforeDefinition):
        check(
            """
            {
              Crate {
                item {
                  importable_path @fold @transform(op: "count") @tag(name: "c") {
                    public_api @filter(op: "=", value: ["%c"])
                    path @output
                  }
                }
              }
            }
            """
        )


def test_outer_tag_visible_inside_fold():
    checked = check(
        """
        {
          Crate {
            item {
              name @tag
              importable_path @fold @transform(op: "count") {
                path @filter(op: "contains", value: ["%name"])
              }
            }
          }
        }
        """
    )
    assert checked.output_names == ()


def test_count_tag_visible_after_fold():
    check(
        """
        {
          Crate {
            item {
              importable_path @fold @transform(op: "count") @tag(name: "c") {
                path @output
              }
              span {
                begin_line @filter(op: "=", value: ["%c"])
              }
            }
          }
        }
        """
    )


def test_duplicate_tag_name():
    with pytest.raises(DuplicateTagName):
        check(
            """
            {
              Crate {
                item {
                  name @tag(name: "x")
                  visibility_limit @tag(name: "x")
                }
              }
            }
            """
        )


def test_edge_directives_require_fold_and_count():
    with pytest.raises(TypeMismatch):
        check('{ Crate { item @filter(op: "=", value: [1]) { name @output } } }')
    with pytest.raises(TypeMismatch):
        check("{ Crate { item @output { name @tag(name: \"x\") } } }")
    with pytest.raises(TypeMismatch):
        check('{ Crate { item @fold @filter(op: "=", value: [1]) { name @output } } }')
    with pytest.raises(TypeMismatch):
        check("{ Crate { item @fold @optional { name @output } } }")
    # Counted folds take Int-kinded filters.
    check('{ Crate { item @fold @transform(op: "count") @filter(op: "=", value: ["$zero"]) } }')
    with pytest.raises(TypeMismatch):
        check('{ Crate { item @fold @transform(op: "count") @filter(op: "=", value: ["x"]) } }')


def test_nested_fold_subtree_collection():
    checked = check(
        """
        {
          Crate {
            item {
              ... on Struct {
                field @fold {
                  name @output(name: "field_names")
                  attribute @fold @transform(op: "count") @output(name: "attr_counts")
                }
              }
            }
          }
        }
        """
    )
    fold = checked.selections[0].children[0].children[0]
    assert isinstance(fold, CheckedEdge) and fold.fold and not fold.counted
    assert set(fold.subtree_output_names) == {"field_names", "attr_counts"}
