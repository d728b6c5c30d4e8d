import numpy as np
import pytest
from hypothesis import given, strategies as st

from separability import (
    AudioClip,
    ConfigurationError,
    InvalidInputError,
    OracleConfig,
    StftConfig,
    apply_masks,
    compute_irm,
    oracle_separate,
    stft,
)

CFG = StftConfig(256, 64)


def _specs(seed, n_sources, n_samples=1500, n_channels=1):
    gen = np.random.Generator(np.random.PCG64(seed))
    clips = [
        AudioClip(gen.normal(0.0, 0.4, (n_channels, n_samples)), 44100)
        for _ in range(n_sources)
    ]
    return clips, [stft(c, CFG) for c in clips]


class TestOracleConfig:
    def test_defaults(self):
        cfg = OracleConfig()
        assert cfg.alpha == 2.0
        assert cfg.zero_bin_policy == "uniform"

    @pytest.mark.parametrize("kwargs", [{"alpha": 0.0}, {"alpha": -1.0}, {"zero_bin_policy": "nan"}])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ConfigurationError):
            OracleConfig(**kwargs)


class TestMaskInvariants:
    @given(
        n_sources=st.integers(min_value=2, max_value=6),
        alpha=st.sampled_from([0.5, 1.0, 2.0, 4.0]),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_partition_of_unity(self, n_sources, alpha, seed):
        _, specs = _specs(seed, n_sources, n_samples=700)
        masks = compute_irm(specs, OracleConfig(alpha=alpha)).masks
        assert np.all(masks >= 0.0)
        assert np.all(masks <= 1.0)
        total = masks.sum(axis=0)
        assert np.max(np.abs(total - 1.0)) < 1e-12

    def test_uniform_policy_fills_silent_bins(self):
        clips = [AudioClip(np.zeros((1, 700)), 44100) for _ in range(3)]
        specs = [stft(c, CFG) for c in clips]
        masks = compute_irm(specs, OracleConfig(zero_bin_policy="uniform")).masks
        assert np.allclose(masks, 1.0 / 3.0)

    def test_zero_policy_suppresses_silent_bins(self):
        clips = [AudioClip(np.zeros((1, 700)), 44100) for _ in range(3)]
        specs = [stft(c, CFG) for c in clips]
        masks = compute_irm(specs, OracleConfig(zero_bin_policy="zero")).masks
        assert np.all(masks == 0.0)

    def test_identical_sources_share_evenly(self, rng):
        clip = AudioClip(rng.normal(0.0, 0.4, (1, 900)), 44100)
        spec = stft(clip, CFG)
        masks = compute_irm([spec, spec]).masks
        assert np.allclose(masks, 0.5, atol=1e-15)

    def test_source_ids_attached(self):
        _, specs = _specs(0, 2)
        mask_set = compute_irm(specs, source_ids=("bass", "drums"))
        assert mask_set.source_ids == ("bass", "drums")
        assert mask_set.mask_for("drums").shape == specs[0].bins.shape
        with pytest.raises(InvalidInputError):
            mask_set.mask_for("vocals")


class TestValidation:
    def test_empty_source_list(self):
        with pytest.raises(InvalidInputError):
            compute_irm([])

    def test_mismatched_spectrograms(self):
        _, specs_a = _specs(0, 1, n_samples=700)
        _, specs_b = _specs(0, 1, n_samples=900)
        with pytest.raises(InvalidInputError):
            compute_irm([specs_a[0], specs_b[0]])

    def test_id_count_mismatch(self):
        _, specs = _specs(0, 2)
        with pytest.raises(InvalidInputError):
            compute_irm(specs, source_ids=("only-one",))

    def test_apply_masks_shape_mismatch(self):
        _, specs = _specs(0, 2, n_samples=700)
        mask_set = compute_irm(specs)
        _, other = _specs(1, 1, n_samples=900)
        with pytest.raises(InvalidInputError):
            apply_masks(mask_set, other[0])

    def test_oracle_separate_rejects_misaligned_stems(self, rng):
        mix = AudioClip(rng.normal(0.0, 0.3, (1, 800)), 44100)
        short = AudioClip(rng.normal(0.0, 0.3, (1, 700)), 44100)
        with pytest.raises(InvalidInputError):
            oracle_separate(mix, [short, short], CFG)


class TestOracleSeparation:
    @given(seed=st.integers(min_value=0, max_value=2**31))
    def test_estimates_sum_to_mixture(self, seed):
        clips, _ = _specs(seed, 3, n_samples=1200)
        mix = AudioClip(sum(c.samples for c in clips), 44100)
        estimates = oracle_separate(mix, clips, CFG)
        total = sum(e.samples for e in estimates)
        assert np.max(np.abs(total - mix.samples)) < 1e-9

    def test_sum_consistency_under_zero_policy(self, rng):
        clips, _ = _specs(5, 3, n_samples=1200)
        mix = AudioClip(sum(c.samples for c in clips), 44100)
        estimates = oracle_separate(
            mix, clips, CFG, OracleConfig(zero_bin_policy="zero")
        )
        # Noise excites every bin, so the zero policy changes nothing here
        # and the partition is preserved.
        total = sum(e.samples for e in estimates)
        assert np.max(np.abs(total - mix.samples)) < 1e-9

    def test_identical_stems_recovered_exactly(self, rng):
        clip = AudioClip(rng.normal(0.0, 0.4, (2, 1200)), 44100)
        mix = AudioClip(2.0 * clip.samples, 44100)
        estimates = oracle_separate(mix, [clip, clip], CFG)
        for est in estimates:
            assert np.max(np.abs(est.samples - clip.samples)) < 1e-9
