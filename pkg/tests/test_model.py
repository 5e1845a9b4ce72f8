"""Tests for model module."""

import math

import numpy as np
import pytest
import torch

from uapoint.alignment import Prototypes
from uapoint.common.errors import ConfigurationError, DegenerateInputError, ParameterError, ShapeError
from uapoint.model import (
    FileKnowledgeSource,
    HashedKnowledgeSource,
    apply_lora,
    class_embedding_matrix,
    class_probs,
    cloud_prompts,
    encode_point_set,
    encode_view,
    gen_text_prompt,
    gen_visual_prompt,
    get_knowledge_source,
    load_checkpoint,
    save_checkpoint,
    write_knowledge_file,
)
from uapoint.numerics import DTYPE
from uapoint.pointcloud import PointSet
from uapoint.projection import DepthMap

from .helpers import TINY_IMAGE, make_state, randomize_adapters


def t(values) -> torch.Tensor:
    return torch.tensor(values, dtype=DTYPE)


class TestLora:
    """Test low-rank adapters."""

    def test_rank_one(self):
        """Test B=[[1],[0]], A=[[0,2]] on a zero base gives [[0,2],[0,0]]."""
        base = torch.zeros(2, 2, dtype=DTYPE)
        out = apply_lora(base, t([[0.0, 2.0]]), t([[1.0], [0.0]]), 1.0)
        assert torch.equal(out, t([[0.0, 2.0], [0.0, 0.0]]))
        assert torch.equal(base, torch.zeros(2, 2, dtype=DTYPE))

    def test_zero_up_projection(self):
        """Test a zero B leaves the base weight unchanged."""
        base = torch.arange(6, dtype=DTYPE).reshape(2, 3)
        out = apply_lora(base, torch.ones(4, 3, dtype=DTYPE), torch.zeros(2, 4, dtype=DTYPE), 2.0)
        assert torch.equal(out, base)

    def test_rank_mismatch(self):
        """Test mismatched adapter shapes are rejected."""
        with pytest.raises(ShapeError):
            apply_lora(torch.zeros(2, 2, dtype=DTYPE), torch.zeros(2, 2, dtype=DTYPE), torch.zeros(2, 3, dtype=DTYPE), 1.0)


class TestPointEncoder:
    """Test geometric tokens."""

    def test_shape_and_permutation(self, tiny_state, tiny_benchmark):
        """Test four tokens that do not depend on point order."""
        ps = tiny_benchmark[0][0]
        tokens = encode_point_set(ps, tiny_state)
        assert tokens.shape == (4, tiny_state.cfg.token_dim)
        perm = np.random.default_rng(3).permutation(len(ps))
        assert torch.equal(tokens, encode_point_set(PointSet(ps.points[perm]), tiny_state))

    def test_duplicates(self, tiny_state, tiny_benchmark):
        """Test duplicating points leaves the max-pooled tokens unchanged."""
        ps = tiny_benchmark[0][1]
        doubled = PointSet(np.vstack([ps.points, ps.points[:10]]))
        assert torch.allclose(encode_point_set(ps, tiny_state), encode_point_set(doubled, tiny_state), atol=1e-12)

    def test_empty_groups(self, tiny_state):
        """Test quadrants without points give zero tokens."""
        points = np.abs(np.random.default_rng(0).normal(size=(12, 3)))
        tokens = encode_point_set(PointSet(points), tiny_state)
        assert torch.count_nonzero(tokens[0]) > 0
        assert torch.equal(tokens[1:], torch.zeros(3, tiny_state.cfg.token_dim, dtype=DTYPE))

    def test_too_few_points(self, tiny_state):
        """Test fewer than eight points are rejected."""
        with pytest.raises(DegenerateInputError):
            encode_point_set(PointSet(np.eye(3)), tiny_state)


class TestPrompts:
    """Test knowledge and geometry prompts."""

    def test_shapes(self, tiny_state, tiny_benchmark):
        """Test prompt shapes."""
        cfg = tiny_state.cfg
        assert gen_text_prompt(tiny_state).shape == (cfg.query_length, cfg.embed_dim)
        tokens, prompts = cloud_prompts(tiny_state, tiny_benchmark[0][:3])
        assert len(tokens) == 3
        assert prompts.shape == (3, cfg.query_length, cfg.token_dim)
        assert gen_visual_prompt(tiny_state, tokens[0]).shape == (cfg.query_length, cfg.token_dim)

    def test_zero_value_projection(self, tiny_state):
        """Test a zero value projection makes every prompt row identical."""
        with torch.no_grad():
            tiny_state.w_v_text.zero_()
        prompt = gen_text_prompt(tiny_state)
        assert torch.allclose(prompt[0], prompt[1], atol=1e-12)

    def test_visual_prompt_disabled(self, tiny_benchmark):
        """Test prompt mode text turns the visual prompt off."""
        state = make_state(prompt_mode="text")
        tokens, prompts = cloud_prompts(state, tiny_benchmark[0][:2])
        assert prompts is None
        assert len(tokens) == 2
        assert state.use_text_prompt

    def test_text_prompt_disabled(self, tiny_benchmark):
        """Test prompt mode visual keeps P_v and turns P_t off."""
        state = make_state(prompt_mode="visual")
        _, prompts = cloud_prompts(state, tiny_benchmark[0][:2])
        assert prompts is not None
        assert not state.use_text_prompt

    def test_no_prompts(self):
        """Test prompt mode none turns both prompts off."""
        state = make_state(prompt_mode="none")
        assert not state.use_text_prompt and not state.use_visual_prompt

    def test_class_embedding_rows(self, tiny_state):
        """Test effective class embeddings are unit rows."""
        classes = class_embedding_matrix(tiny_state, gen_text_prompt(tiny_state))
        assert classes.shape == (2, tiny_state.cfg.embed_dim)
        assert torch.allclose(torch.linalg.vector_norm(classes, dim=1), torch.ones(2, dtype=DTYPE), atol=1e-12)


class TestClassProbs:
    """Test the cosine class head."""

    def test_closed_form(self, tiny_state):
        """Test cosines 1 and 0 at temperature 1 give e / (e + 1)."""
        with torch.no_grad():
            tiny_state.log_tau.zero_()
        d = tiny_state.cfg.embed_dim
        classes = torch.eye(d, dtype=DTYPE)[:2]
        p = class_probs(torch.eye(d, dtype=DTYPE)[0], tiny_state, classes)
        assert float(p[0]) == pytest.approx(math.e / (math.e + 1.0), abs=1e-12)
        assert float(p.sum()) == pytest.approx(1.0, abs=1e-12)

    def test_batched(self, tiny_state):
        """Test leading axes are kept."""
        v = torch.randn(3, 5, tiny_state.cfg.embed_dim, dtype=DTYPE, generator=torch.Generator().manual_seed(0))
        p = class_probs(v, tiny_state)
        assert p.shape == (3, 5, 2)

    def test_default_classes_prompt_conditioned(self, tiny_state):
        """Test the default class matrix is the one the selection path uses."""
        v = torch.randn(4, tiny_state.cfg.embed_dim, dtype=DTYPE, generator=torch.Generator().manual_seed(1))
        classes = class_embedding_matrix(tiny_state, gen_text_prompt(tiny_state))
        assert torch.equal(class_probs(v, tiny_state), class_probs(v, tiny_state, classes))
        assert torch.allclose(p.sum(dim=-1), torch.ones(3, 5, dtype=DTYPE), atol=1e-12)


class TestViewEncoder:
    """Test depth-view embeddings."""

    def test_unit_and_deterministic(self, tiny_state):
        """Test the same view and prompt give the same unit embedding."""
        dm = DepthMap(np.random.default_rng(0).uniform(size=(TINY_IMAGE, TINY_IMAGE)))
        a = encode_view(dm, None, tiny_state)
        assert torch.equal(a, encode_view(dm, None, tiny_state))
        assert float(torch.linalg.vector_norm(a)) == pytest.approx(1.0, abs=1e-12)

    def test_prompt_changes_embedding(self, tiny_state):
        """Test prompt tokens enter the pooled feature."""
        dm = DepthMap(np.full((TINY_IMAGE, TINY_IMAGE), 0.5))
        prompt = torch.ones(2, tiny_state.cfg.token_dim, dtype=DTYPE)
        assert not torch.allclose(encode_view(dm, None, tiny_state), encode_view(dm, prompt, tiny_state))

    def test_wrong_size(self, tiny_state):
        """Test a depth map of the wrong size is rejected."""
        with pytest.raises(ShapeError):
            encode_view(DepthMap(np.zeros((32, 32))), None, tiny_state)


class TestModelState:
    """Test parameter bookkeeping."""

    def test_variants(self, tiny_state):
        """Test each variant trains its own adapter pairs."""
        text = tiny_state.trainable_names("T")
        view = tiny_state.trainable_names("V")
        both = tiny_state.trainable_names("B")
        assert "text_a" in text and "patch_a" not in text
        assert "patch_b" in view and "text_b" not in view
        assert set(text) | set(view) == set(both)
        with pytest.raises(ParameterError):
            tiny_state.trainable_names("X")

    def test_frozen_buffers(self, tiny_state):
        """Test frozen tensors are not parameters."""
        names = dict(tiny_state.named_parameters())
        for frozen in ("knowledge", "patch_base", "head_base", "text_base", "pos"):
            assert frozen not in names

    def test_init_seed(self):
        """Test the same init seed gives identical parameters."""
        a, b = make_state(), make_state()
        for (name, x), (_, y) in zip(a.named_parameters(), b.named_parameters()):
            assert torch.equal(x, y), name
        assert not torch.equal(make_state(init_seed=1).point_w1, a.point_w1)

    def test_unit_class_embeddings(self, tiny_state):
        """Test class embeddings start on the unit sphere."""
        norms = torch.linalg.vector_norm(tiny_state.class_embeddings, dim=1)
        assert torch.allclose(norms, torch.ones(2, dtype=DTYPE), atol=1e-12)


class TestKnowledge:
    """Test knowledge embedding sources."""

    def test_file_reorders_rows(self, tmp_path):
        """Test rows follow the requested class order."""
        path = tmp_path / "know.emb"
        write_knowledge_file(path, ["cube", "sphere"], np.array([[1.0, 0.0], [0.0, 1.0]]))
        matrix = FileKnowledgeSource(path).load(["sphere", "cube"])
        assert np.array_equal(matrix, [[0.0, 1.0], [1.0, 0.0]])

    def test_missing_class(self, tmp_path):
        """Test a class without a row is a configuration error."""
        path = tmp_path / "know.emb"
        write_knowledge_file(path, ["cube"], np.ones((1, 4)))
        with pytest.raises(ConfigurationError):
            FileKnowledgeSource(path).load(["sphere"])

    def test_bad_magic(self, tmp_path):
        """Test a file that is not EMB1 is rejected."""
        path = tmp_path / "know.emb"
        write_knowledge_file(path, ["cube"], np.ones((1, 4)))
        path.write_bytes(b"XXXX" + path.read_bytes()[4:])
        with pytest.raises(ConfigurationError):
            FileKnowledgeSource(path).load(["cube"])

    def test_hashed_fallback(self):
        """Test the fallback gives fixed unit vectors per name."""
        source = get_knowledge_source(None, 8)
        assert isinstance(source, HashedKnowledgeSource)
        a = source.load(["sphere", "cube"])
        assert np.array_equal(a, HashedKnowledgeSource(8).load(["sphere", "cube"]))
        assert np.allclose(np.linalg.norm(a, axis=1), 1.0)
        assert np.array_equal(a[1], source.load(["cube"])[0])


class TestCheckpoint:
    """Test CKPT1 files."""

    def test_round_trip(self, tmp_path):
        """Test tensors, class names, variant and prototypes survive to f32 precision."""
        state = make_state()
        randomize_adapters(state)
        state.source_prototypes = Prototypes(t([[0.6, 0.8] + [0.0] * 6, [0.0] * 8]), t([1.5, 0.0]))
        path = tmp_path / "model.ckpt"
        save_checkpoint(state, path, "V")

        loaded, variant = load_checkpoint(path)
        assert variant == "V"
        assert loaded.class_names == ["sphere", "cube"]
        assert loaded.cfg.model_dump() == state.cfg.model_dump()
        for name, tensor in state.named_parameters():
            assert torch.allclose(getattr(loaded, name), tensor, atol=1e-6), name
        assert torch.allclose(loaded.knowledge, state.knowledge, atol=1e-6)
        assert loaded.source_prototypes.valid.tolist() == [True, False]

    def test_bad_magic(self, tmp_path):
        """Test a file without the magic is rejected."""
        path = tmp_path / "model.ckpt"
        path.write_bytes(b"NOPE!" + b"\x00" * 32)
        with pytest.raises(ConfigurationError):
            load_checkpoint(path)

    def test_truncated(self, tmp_path):
        """Test a cut-off checkpoint is rejected."""
        path = tmp_path / "model.ckpt"
        save_checkpoint(make_state(), path, "B")
        path.write_bytes(path.read_bytes()[:-100])
        with pytest.raises(ConfigurationError):
            load_checkpoint(path)

    def test_missing(self, tmp_path):
        """Test a missing checkpoint is a configuration error."""
        with pytest.raises(ConfigurationError):
            load_checkpoint(tmp_path / "none.ckpt")
