//! Complex erfc against a frozen 40-digit reference table (mpmath), covering
//! both evaluation branches, the branch boundary |z| = 6, the axes and all
//! four quadrants.

use clockback_core::numerics::{erf, erfc};
use clockback_core::Complex64;

const REFERENCE: &[(f64, f64, f64, f64)] = &[
    (0.0, 0.0, 1.0, 0.0),
    (1.0, 0.0, 0.15729920705028513066, 0.0),
    (-1.0, 0.0, 1.8427007929497148693, 0.0),
    (3.0, 0.0, 0.000022090496998585441373, 0.0),
    (5.5, 0.0, 7.3578479179743980631e-15, 0.0),
    (10.0, 0.0, 2.088487583762544757e-45, 0.0),
    (26.0, 0.0, 5.6631924088561428465e-296, 0.0),
    (-4.0, 0.0, 1.9999999845827420997, 0.0),
    (0.0, 1.0, 1.0, -1.650425758797542876),
    (0.0, 5.0, 1.0, -8298273880.6768035161),
    (0.0, 12.0, 1.0, -1.6299357995243494037e+61),
    (0.7, 0.3, 0.27730449983596513233, -0.20739557153081302311),
    (2.0, 2.0, -0.15131086639806902401, -0.12729162946314079101),
    (2.0, -2.0, -0.15131086639806902401, 0.12729162946314079101),
    (4.0, 3.9, 0.039250535894348403709, -0.023574928905439167288),
    (6.5, 0.01, 3.8093511441510641218e-20, -5.0385281614393381286e-21),
    (5.9, -0.2, -5.480004879144504458e-17, 5.0910033363592240866e-17),
    (0.1, 5.95, -208261636251648.19202, -87588852872219.721372),
    (1e-08, 1e-08, 0.99999998871620832904, -1.1283791670955125223e-8),
    (0.3, -0.4, 0.61795676741698207935, 0.43125203623196416224),
    (8.0, -7.0, 1.5050499958343530415e-8, -6.0616323918856436237e-9),
    (20.0, 5.0, 2.5789023528157391963e-165, 2.7500403709055798501e-165),
    (-0.5, 2.5, 77.00304652657264075, 61.010112413398781654),
    (-3.0, -1.0, 1.9999423861320137624, 7.7179563813780135758e-7),
    (-1.618875, -1.954711, 1.511812670295916736, 0.55375499041988889777),
    (-2.817005, 2.980964, 1.8948455823240746898, 0.33983684766750949842),
    (0.90021, -3.459284, 3742.7860140555353228, 10825.138595731221224),
    (2.516051, 5.123931, -8129319.5230889263162, -44116998.190522165605),
    (-1.448773, 4.626155, 14248965.725018932572, -24811006.160654788829),
    (5.167579, -2.847239, 5.8361400639758044662e-11, -7.931648305745178349e-10),
    (0.082128, -4.783786, -722880992.48498342399, 748856149.31939595399),
    (1.976641, -3.826019, -5375.8613806867961598, -2850.6767382257649448),
    (-2.127406, 3.408202, 168.25273030947619348, -37.787337971736169283),
    (0.468614, 3.128062, -992.90166733385810581, 2494.0318540355078715),
    (-3.947267, 1.829888, 2.0000004113947090153, -4.6484124477983305451e-7),
    (4.87026, 0.393783, -4.7356806055742907149e-12, 4.6074675725754296564e-12),
    (-2.658343, 3.008402, 2.4614675545944527026, 0.91309028715600859474),
    (-2.194862, -1.488924, 1.9892550958516306374, 0.010883519360823215372),
    (-1.223103, 3.765009, 24575.632913565441996, 40036.530414903732634),
    (1.936926, -1.946098, -0.083917074309857697706, 0.19351023519457399155),
    (-4.198165, -3.329272, 2.0001429974099078703, -0.000049496933149393669543),
    (3.329772, -1.155958, -1.4108068976710451431e-6, 8.9300556765568286836e-6),
    (-4.107566, 1.84648, 2.0000001738305460968, -2.3338173348740963914e-8),
    (-2.402858, 5.161633, -81023043.860439525819, -82643802.771112153895),
    (-1.95385, 4.608501, -3999275.975901643377, -1296462.7300183993076),
    (-0.932797, -2.92332, -380.56908640427830736, 158.65212157093877658),
    (-2.861599, 0.123954, 1.9999614147617059729, -0.000035842629292928723613),
    (1.711328, 4.237025, -420158.46576533271388, -15693.800346871671414),
];

#[test]
fn erfc_matches_high_precision_reference() {
    for &(x, y, re, im) in REFERENCE {
        let z = Complex64::new(x, y);
        let expected = Complex64::new(re, im);
        let got = erfc(z);
        let err = (got - expected).norm() / expected.norm();
        assert!(err <= 1e-13, "erfc({z}) = {got}, expected {expected}, rel err {err:e}");
    }
}

#[test]
fn erf_is_one_minus_erfc() {
    for &(x, y, re, im) in REFERENCE {
        let z = Complex64::new(x, y);
        let expected = 1.0 - Complex64::new(re, im);
        let got = erf(z);
        assert!((got - expected).norm() <= 1e-13 * (1.0 + expected.norm()), "erf({z})");
    }
}
