"""
Unit tests for experiment configuration files and their CLI overrides
"""

import os
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../..'))

from gossip_sim.errors import InvalidConfig
from gossip_sim.experiment_config import ExperimentConfig


class TestExperimentConfig:
    """Test suite for ExperimentConfig"""

    @pytest.fixture
    def config(self):
        """A small experiment over two path sizes"""
        return ExperimentConfig.from_dict({
            "family": "path",
            "sizes": [4, 8],
            "protocol": ["superstep", "baseline"],
            "seed_count": 3,
        })

    def test_matrix_order(self, config):
        """Test that the matrix enumerates protocols, then sizes"""
        assert config.matrix() == [
            (0, "superstep", {"n": 4}),
            (1, "superstep", {"n": 8}),
            (2, "baseline", {"n": 4}),
            (3, "baseline", {"n": 8}),
        ]

    def test_seed_list(self, config):
        """Test seed ranges and explicit seed lists"""
        assert config.seed_list() == [0, 1, 2]
        explicit = config.with_overrides({"seeds": [5, 1, 5]})
        assert explicit.seed_list() == [1, 5]

    def test_graph_params_carry_seed(self):
        """Test that random families get the graph seed"""
        config = ExperimentConfig.from_dict({"family": "erdos_renyi", "n": 30, "p": 0.1, "graph_seed": 4})
        assert config.graph_params() == [{"p": 0.1, "seed": 4, "n": 30}]
        figure1 = ExperimentConfig.from_dict({"family": "figure1", "sizes": [8], "gadget": 3})
        assert figure1.graph_params() == [{"gadget": 3, "n": 8}]

    def test_exactly_one_graph_source(self):
        """Test that graph and family are mutually exclusive and one is required"""
        with pytest.raises(InvalidConfig):
            ExperimentConfig.from_dict({})
        with pytest.raises(InvalidConfig):
            ExperimentConfig.from_dict({"graph": "g.txt", "family": "path", "n": 3})

    def test_unknown_names(self):
        """Test that unknown protocols, families, algorithms and keys are rejected"""
        with pytest.raises(InvalidConfig, match="unknown protocol"):
            ExperimentConfig.from_dict({"family": "path", "n": 3, "protocol": "telepathy"})
        with pytest.raises(InvalidConfig, match="unknown graph family"):
            ExperimentConfig.from_dict({"family": "hypercube", "n": 3})
        with pytest.raises(InvalidConfig):
            ExperimentConfig.from_dict({"family": "path", "n": 3, "algorithm": "sorting"})
        with pytest.raises(InvalidConfig):
            ExperimentConfig.from_dict({"family": "path", "n": 3, "sede_count": 2})

    def test_numeric_ranges(self):
        """Test the numeric validators"""
        for bad in ({"epsilon": 0}, {"c_tau": -1}, {"workers": 0}, {"tau": 0}, {"seeds": [-1]}):
            with pytest.raises(InvalidConfig):
                ExperimentConfig.from_dict({"family": "path", "n": 3, **bad})

    def test_with_overrides_ignores_none(self, config):
        """Test that unset CLI flags leave the file values alone"""
        updated = config.with_overrides({"seed_count": None, "epsilon": 0.25, "family": None})
        assert updated.seed_count == 3
        assert updated.epsilon == 0.25
        assert updated.family == "path"

    def test_yaml_error_reports_position(self, tmp_path):
        """Test that YAML syntax errors carry line and column"""
        path = tmp_path / "experiment.yaml"
        path.write_text("family: path\nsizes: [4, 8\nprotocol: superstep\n")
        with pytest.raises(InvalidConfig, match=r"experiment\.yaml:\d+:\d+"):
            ExperimentConfig.load_from_file(str(path))

    def test_missing_file(self, tmp_path):
        """Test that a missing experiment file is an error"""
        with pytest.raises(InvalidConfig, match="not found"):
            ExperimentConfig.load_from_file(str(tmp_path / "absent.yaml"))

    def test_non_mapping(self, tmp_path):
        """Test that the top level must be a mapping"""
        path = tmp_path / "experiment.yaml"
        path.write_text("- family\n- path\n")
        with pytest.raises(InvalidConfig, match="mapping"):
            ExperimentConfig.load_from_file(str(path))

    def test_save_and_load(self, config, tmp_path):
        """Test that a saved experiment loads back equal"""
        path = tmp_path / "saved.yaml"
        config.save_to_file(str(path))
        assert ExperimentConfig.load_from_file(str(path)) == config

    def test_shipped_experiment_file(self):
        """Test that the repository experiment.yaml is valid"""
        path = os.path.join(os.path.dirname(__file__), '../../experiment.yaml')
        config = ExperimentConfig.load_from_file(path)
        assert config.family == "erdos_renyi"
        assert len(config.matrix()) == len(config.protocols()) * len(config.sizes)
