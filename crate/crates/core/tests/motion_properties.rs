use lpsim::motion::{cfsa_weights, ifns, process_clip, IfnsConfig, ProjectionKernels};
use lpsim::{Image, VideoClip};
use proptest::prelude::*;

fn clip(len: usize) -> impl Strategy<Value = VideoClip> {
    prop::collection::vec(prop::collection::vec(0.0f64..0.5, 8 * 8), len).prop_map(|fs| {
        VideoClip::new(
            fs.into_iter().map(|d| Image::from_vec(8, 8, 1, d).unwrap()).collect(),
            25.0,
        )
        .unwrap()
    })
}

proptest! {
    #[test]
    fn weights_sum_to_one(p in 1usize..100, a in 0usize..50, b in 0usize..50) {
        let t = p + a;
        let s = t + b;
        prop_assume!(p < s);
        let (wp, wn) = cfsa_weights(p, t, s).unwrap();
        prop_assert_eq!(wp + wn, 1.0);
        if t - p == s - t {
            prop_assert_eq!((wp, wn), (0.5, 0.5));
        }
    }

    #[test]
    fn constant_offset_cancels(v in clip(6), c in 0.0f64..0.5, t in 1usize..=6, step in 1usize..4) {
        let cfg = IfnsConfig::new(step).unwrap();
        let shifted = v.map_frames(|_, f| f.map(|x| x + c)).unwrap();
        let a = ifns(&v, t, &cfg).unwrap();
        let b = ifns(&shifted, t, &cfg).unwrap();
        prop_assert!(a.d_prev.max_abs_diff(&b.d_prev).unwrap() < 1e-12);
        prop_assert!(a.d_next.max_abs_diff(&b.d_next).unwrap() < 1e-12);
        prop_assert!(a.d_mean.max_abs_diff(&b.d_mean).unwrap() < 1e-12);
    }

    #[test]
    fn scale_equivariance(v in clip(5), c in 0.0f64..2.0) {
        let cfg = IfnsConfig::new(2).unwrap();
        let k = ProjectionKernels::identity();
        let base = process_clip(&v, &cfg, &k).unwrap();
        let scaled = process_clip(&v.map_frames(|_, f| f.map(|x| c * x)).unwrap(), &cfg, &k).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!(a.psi.map(|x| c * x).max_abs_diff(&b.psi).unwrap() < 1e-12);
        }
    }

    #[test]
    fn maps_are_nonnegative_and_ordered(v in clip(7), t in 1usize..=7, step in 1usize..9) {
        let s = ifns(&v, t, &IfnsConfig::new(step).unwrap()).unwrap();
        prop_assert!(s.prev <= s.t && s.t <= s.next && s.prev < s.next);
        for m in [&s.d_prev, &s.d_next, &s.d_mean] {
            prop_assert!(m.data().iter().all(|&x| x >= 0.0));
        }
    }
}
