import pytest

from logicode_pyshim.host import FactTableServer, QueryError
from shim_fixtures import fact_object, fact_table


@pytest.fixture()
def server():
    return FactTableServer(
        fact_table(
            fact_object("c1", "connector", centroid=(5.0, 5.0), color="red"),
            fact_object("c0", "connector", centroid=(25.0, 5.0), color="green"),
            fact_object("c2", "connector", centroid=(10.0, 25.0), color="blue"),
            fact_object("k0", "cable", length=100.5, area=804.0, centroid=(50.0, 90.0)),
        )
    )


def test_find_annotation_order_and_count(server):
    assert server.find("connector") == ["c1", "c0", "c2"]
    assert server.count("connector") == 3
    assert server.find("unicorn") == []
    assert server.count("unicorn") == 0


def test_size_position_color(server):
    assert server.size("k0") == {"area": 804.0, "length": 100.5}
    assert server.position("c1") == {"x": 5.0, "y": 5.0}
    assert server.color("c1") == {"name": "red", "rgb": [255, 0, 0]}


def test_order_with_ties(server):
    assert server.order("connector", "x") == ["c1", "c2", "c0"]
    # c1 and c0 tie on y=5; object_id breaks the tie
    assert server.order("connector", "y") == ["c0", "c1", "c2"]
    with pytest.raises(QueryError, match="axis"):
        server.order("connector", "diagonal")


def test_nearest(server):
    assert server.nearest("c1", "connector") == "c0"
    with pytest.raises(QueryError, match="candidates"):
        server.nearest("k0", "cable")


def test_overlaps_strict():
    server = FactTableServer(
        fact_table(
            fact_object("a", "pad", centroid=(0.0, 0.0)),
            fact_object("b", "pad", centroid=(8.0, 0.0)),
            fact_object("c", "pad", centroid=(10.0, 0.0)),
        )
    )
    assert server.overlaps("a", "b")
    assert not server.overlaps("a", "c")  # boxes touch at x=5 only


def test_unknown_object(server):
    with pytest.raises(QueryError, match="no object"):
        server.size("ghost")


def test_dispatch_guards(server):
    with pytest.raises(QueryError, match="unknown query"):
        server.dispatch("segment", ["x"])
    with pytest.raises(QueryError, match="argument"):
        server.dispatch("count", [])
    with pytest.raises(QueryError, match="argument"):
        server.dispatch("count", ["a", "b"])
    assert server.dispatch("count", ["cable"]) == 1
