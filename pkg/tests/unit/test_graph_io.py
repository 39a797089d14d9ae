"""
Unit tests for the edge-list file format
"""

import os
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../..'))

from gossip_sim.errors import GraphFormatError
from gossip_sim.graph import Graph, generate
from gossip_sim.graph_io import format_edge_list, parse_edge_list, read_edge_list, read_header, write_edge_list


class TestParseEdgeList:
    """Test suite for parsing edge-list text"""

    def test_basic_file(self):
        """Test header, unweighted and weighted edge lines"""
        g = parse_edge_list("3 2\n0 1\n1 2 2.5\n", name="tiny")
        assert g.n == 3
        assert g.edges() == [(0, 1), (1, 2)]
        assert g.weight(1, 2) == 2.5
        assert g.name == "tiny"

    def test_comments_and_blank_lines(self):
        """Test that comments and blank lines are skipped"""
        text = "# graph: demo\n\n4 3   # n m\n0 1\n\n1 2\n# middle\n2 3\n"
        assert parse_edge_list(text) == generate("path", n=4)

    def test_loop_line(self):
        """Test that `u u a` adds a loop of weight a (stored as 2a)"""
        g = parse_edge_list("2 2\n0 1\n0 0 1.5\n")
        assert g.loops[0] == 3.0

    def test_bad_node_reports_line(self):
        """Test that an out-of-range node carries its line number"""
        with pytest.raises(GraphFormatError) as exc_info:
            parse_edge_list("2 1\n0 5\n")
        assert exc_info.value.line == 2
        assert "line 2" in str(exc_info.value)

    def test_malformed_lines(self):
        """Test non-numeric tokens, bad header and wrong field counts"""
        with pytest.raises(GraphFormatError):
            parse_edge_list("3 1\n0 x\n")
        with pytest.raises(GraphFormatError):
            parse_edge_list("three 1\n0 1\n")
        with pytest.raises(GraphFormatError):
            parse_edge_list("3 1\n0 1 1 1\n")
        with pytest.raises(GraphFormatError):
            parse_edge_list("")

    def test_edge_count_mismatch(self):
        """Test that the header edge count is enforced"""
        with pytest.raises(GraphFormatError):
            parse_edge_list("3 3\n0 1\n1 2\n")

    def test_negative_weight(self):
        """Test that graph validation errors surface as format errors"""
        with pytest.raises(GraphFormatError):
            parse_edge_list("2 1\n0 1 -2\n")


class TestWriteEdgeList:
    """Test suite for writing and reloading edge lists"""

    def test_written_file_reloads(self, tmp_path):
        """Test that a written weighted graph with loops loads back equal"""
        g = Graph(3, [(0, 1, 1.0), (1, 2, 0.5)], self_loops={2: 4.0})
        path = tmp_path / "weighted.txt"
        write_edge_list(g, path, {"graph": "weighted", "seed": 3})
        loaded = read_edge_list(path)
        assert loaded == g
        assert loaded.name == "weighted"
        assert read_header(path) == {"graph": "weighted", "seed": "3"}

    def test_weights_keep_full_precision(self):
        """Test that large and non-integer weights survive a write and reload"""
        g = Graph(3, [(0, 1, 1234567.0), (1, 2, 1.0000001)], self_loops={0: 0.123456789})
        loaded = parse_edge_list(format_edge_list(g))
        assert loaded == g
        assert loaded.weight(0, 1) == 1234567.0
        assert loaded.weight(1, 2) == 1.0000001
        assert loaded.loops[0] == 0.123456789

    def test_writer_emits_sorted_pairs(self):
        """Test that the writer emits u < v in sorted order"""
        text = format_edge_list(Graph.from_edges(3, [(2, 1), (1, 0)]))
        assert text == "3 2\n0 1\n1 2\n"

    def test_missing_file(self, tmp_path):
        """Test that a missing file raises OSError"""
        with pytest.raises(OSError):
            read_edge_list(tmp_path / "absent.txt")
