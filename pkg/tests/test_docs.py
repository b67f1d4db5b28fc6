from pathlib import Path

from logicode.checklang import API_REFERENCE, GRAMMAR_EBNF

DOCS = Path(__file__).resolve().parent.parent / "docs"


def test_grammar_doc_in_sync():
    assert (DOCS / "grammar.ebnf").read_text(encoding="utf-8") == GRAMMAR_EBNF


def test_query_api_doc_in_sync():
    assert (DOCS / "query_api.txt").read_text(encoding="utf-8") == API_REFERENCE
