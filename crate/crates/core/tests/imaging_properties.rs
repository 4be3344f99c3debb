use lpsim::characterize::{ssim, vgi};
use lpsim::conv::convolve;
use lpsim::optics::{linear_response, Psf};
use lpsim::{Image, Kernel2D, SeedSpec};
use proptest::prelude::*;

fn image(h: usize, w: usize, ch: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(0.0f64..1.0, h * w * ch).prop_map(move |d| Image::from_vec(h, w, ch, d).unwrap())
}

fn kernel(size: usize) -> impl Strategy<Value = Kernel2D> {
    prop::collection::vec(0.0f64..1.0, size * size).prop_map(move |w| Kernel2D::new(size, w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convolution_is_additive(a in image(32, 32, 1), b in image(32, 32, 1), k in kernel(9)) {
        let sum = a.zip_map(&b, |x, y| x + y).unwrap();
        let lhs = convolve(&sum, &k).unwrap();
        let rhs = convolve(&a, &k).unwrap().zip_map(&convolve(&b, &k).unwrap(), |x, y| x + y).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-6);
    }

    #[test]
    fn convolution_is_homogeneous(a in image(32, 32, 1), k in kernel(5), c in -3.0f64..3.0) {
        let lhs = convolve(&a.map(|v| c * v), &k).unwrap();
        let rhs = convolve(&a, &k).unwrap().map(|v| c * v);
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-6);
    }

    #[test]
    fn forward_model_is_affine_before_clamping(a in image(24, 24, 3), b in image(24, 24, 3), k in kernel(11), tau in 0.2f64..1.0) {
        let psf = Psf::new(k, tau).unwrap();
        let zero = Image::new(24, 24, 3);
        let sum = a.zip_map(&b, |x, y| x + y).unwrap();
        let lhs = linear_response(&sum, &psf).unwrap()
            .zip_map(&linear_response(&zero, &psf).unwrap(), |x, y| x + y).unwrap();
        let rhs = linear_response(&a, &psf).unwrap()
            .zip_map(&linear_response(&b, &psf).unwrap(), |x, y| x + y).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-6);
    }

    #[test]
    fn ssim_is_symmetric(a in image(16, 16, 1), b in image(16, 16, 1)) {
        prop_assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn vgi_is_monotone_in_radius(k in kernel(15), r1 in 0.0f64..9.0, dr in 0.0f64..0.9) {
        let psf = Psf::new(k, 1.0).unwrap();
        let r2 = r1 + dr;
        prop_assert!(vgi(&psf, r1).unwrap() >= vgi(&psf, r2).unwrap());
    }

    #[test]
    fn seed_streams_are_reproducible(master in any::<u64>(), label in "[a-z/0-9]{1,16}") {
        use rand::Rng;
        let s = SeedSpec::new(master);
        let a: Vec<u64> = (0..8).map({ let mut r = s.stream(&label); move |_| r.random() }).collect();
        let b: Vec<u64> = (0..8).map({ let mut r = s.stream(&label); move |_| r.random() }).collect();
        prop_assert_eq!(a, b);
    }
}
