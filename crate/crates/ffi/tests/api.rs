use std::ffi::{CStr, CString};
use std::ptr;

use hypermagnet::io::save_hypergraph;
use hypermagnet::magnetic::magnetic_laplacian;
use hypermagnet::walks::edvw_transition;
use hypermagnet::{ChargeParams, EdvwMatrix, Hypergraph, LaplacianForm};
use hypermagnet_ffi::*;

fn last_error() -> String {
    let p = hm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn ok(status: HmStatus) {
    assert_eq!(status, HmStatus::Ok, "{}", last_error());
}

/// e1 = {0, 1, 2}, e2 = {0, 1}
unsafe fn skewed() -> *mut HmHypergraph {
    let offsets = [0usize, 3, 5];
    let vertices = [0usize, 1, 2, 0, 1];
    let mut h = ptr::null_mut();
    ok(hm_hypergraph_new(
        3,
        2,
        offsets.as_ptr(),
        vertices.as_ptr(),
        ptr::null(),
        &mut h,
    ));
    h
}

unsafe fn matrix(p: *const HmTransition) -> Vec<f64> {
    let mut n = 0;
    ok(hm_transition_n(p, &mut n));
    let mut out = vec![0.0; n * n];
    ok(hm_transition_values(p, out.as_mut_ptr(), out.len()));
    out
}

#[test]
fn hypergraph_accessors() {
    unsafe {
        let h = skewed();
        let (mut n, mut m) = (0, 0);
        ok(hm_hypergraph_n_vertices(h, &mut n));
        ok(hm_hypergraph_n_edges(h, &mut m));
        assert_eq!((n, m), (3, 2));

        let mut d = [0.0; 3];
        ok(hm_hypergraph_vertex_degrees(h, d.as_mut_ptr(), 3));
        assert_eq!(d, [2.0, 2.0, 1.0]);

        let mut buf = [0usize; 3];
        let mut size = 0;
        ok(hm_hypergraph_edge(h, 0, buf.as_mut_ptr(), 3, &mut size));
        assert_eq!((size, buf), (3, [0, 1, 2]));
        let status = hm_hypergraph_edge(h, 0, buf.as_mut_ptr(), 2, &mut size);
        assert_eq!(status, HmStatus::BufferTooSmall);
        assert_eq!(size, 3);
        assert_eq!(
            hm_hypergraph_edge(h, 5, buf.as_mut_ptr(), 3, &mut size),
            HmStatus::InvalidInput
        );
        hm_hypergraph_free(h);
    }
}

#[test]
fn walks_match_the_library() {
    unsafe {
        let h = skewed();
        ok(hm_hypergraph_set_edvw(
            h,
            [7.0, 1.0, 1.0, 1.0, 3.0].as_ptr(),
            5,
        ));
        let mut p = ptr::null_mut();
        ok(hm_transition_new(h, HmWalkKind::Edvw, &mut p));

        let g = Hypergraph::from_edges(3, vec![vec![0, 1, 2], vec![0, 1]], None).unwrap();
        let r = EdvwMatrix::new(&g, vec![vec![7.0, 1.0, 1.0], vec![1.0, 3.0]])
            .unwrap()
            .normalized();
        let want = edvw_transition(&g, &r).unwrap();
        let got = matrix(p);
        for (a, b) in got.iter().zip(want.values().iter()) {
            assert_eq!(a, b);
        }

        let mut pi = [0.0; 3];
        ok(hm_transition_stationary(p, false, pi.as_mut_ptr(), 3));
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let (mut reversible, mut residual) = (true, 0.0);
        ok(hm_transition_is_reversible(
            p,
            1e-8,
            false,
            &mut reversible,
            &mut residual,
        ));
        assert!(!reversible && residual > 1e-3);

        let mut z = ptr::null_mut();
        ok(hm_transition_new(h, HmWalkKind::Zhou, &mut z));
        ok(hm_transition_is_reversible(
            z,
            1e-10,
            false,
            &mut reversible,
            ptr::null_mut(),
        ));
        assert!(reversible);

        hm_transition_free(z);
        hm_transition_free(p);
        hm_hypergraph_free(h);
    }
}

#[test]
fn laplacian_matches_the_library() {
    unsafe {
        let h = skewed();
        let mut p = ptr::null_mut();
        ok(hm_transition_new(h, HmWalkKind::Edvw, &mut p));
        let values = matrix(p);
        let dense = ndarray::Array2::from_shape_vec((3, 3), values).unwrap();

        let mut l = ptr::null_mut();
        ok(hm_laplacian_new(
            p,
            0.25,
            HmLaplacianForm::Normalized,
            true,
            &mut l,
        ));
        let want = magnetic_laplacian(
            &dense,
            &ChargeParams::Scalar(0.25),
            LaplacianForm::Normalized,
            true,
        )
        .unwrap();
        let (mut re, mut im) = ([0.0; 9], [0.0; 9]);
        ok(hm_laplacian_values(l, re.as_mut_ptr(), im.as_mut_ptr(), 9));
        for (k, z) in want.laplacian.iter().enumerate() {
            assert_eq!((re[k], im[k]), (z.re, z.im));
        }
        ok(hm_laplacian_renormalized(
            l,
            re.as_mut_ptr(),
            im.as_mut_ptr(),
            9,
        ));
        for (k, z) in want.renormalized.as_ref().unwrap().iter().enumerate() {
            assert_eq!((re[k], im[k]), (z.re, z.im));
        }

        let mut ev = [0.0; 3];
        ok(hm_laplacian_eigenvalues(l, ev.as_mut_ptr(), 3));
        assert!(ev[0] > -1e-12 && ev[0] <= ev[1] && ev[1] <= ev[2]);
        let mut lmax = 0.0;
        ok(hm_laplacian_lambda_max(l, &mut lmax));
        assert!((lmax - ev[2]).abs() < 1e-8);

        // a uniform charge matrix reproduces the scalar charge
        let mut q = [0.25; 9];
        for i in 0..3 {
            q[i * 4] = 0.0;
        }
        let mut lq = ptr::null_mut();
        ok(hm_laplacian_with_charges(
            p,
            q.as_ptr(),
            HmLaplacianForm::Normalized,
            false,
            &mut lq,
        ));
        let (mut re2, mut im2) = ([0.0; 9], [0.0; 9]);
        ok(hm_laplacian_values(
            lq,
            re2.as_mut_ptr(),
            im2.as_mut_ptr(),
            9,
        ));
        ok(hm_laplacian_values(l, re.as_mut_ptr(), im.as_mut_ptr(), 9));
        for k in 0..9 {
            assert!((re[k] - re2[k]).abs() < 1e-15 && (im[k] - im2[k]).abs() < 1e-15);
        }
        assert_eq!(
            hm_laplacian_renormalized(lq, re.as_mut_ptr(), im.as_mut_ptr(), 9),
            HmStatus::InvalidInput
        );

        hm_laplacian_free(lq);
        hm_laplacian_free(l);
        hm_transition_free(p);
        hm_hypergraph_free(h);
    }
}

#[test]
fn load_reads_stored_weights() {
    let g = Hypergraph::from_edges(4, vec![vec![0, 1, 2], vec![2, 3], vec![0, 3]], None).unwrap();
    let r = EdvwMatrix::new(
        &g,
        vec![vec![1.0, 2.0, 3.0], vec![5.0, 1.0], vec![1.0, 1.0]],
    )
    .unwrap()
    .normalized();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.jsonl");
    save_hypergraph(&path, &g, Some(&r)).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut h = ptr::null_mut();
        ok(hm_hypergraph_load(cpath.as_ptr(), &mut h));
        let mut p = ptr::null_mut();
        ok(hm_transition_new(h, HmWalkKind::Edvw, &mut p));
        let want = edvw_transition(&g, &r).unwrap();
        assert_eq!(matrix(p), want.values().iter().copied().collect::<Vec<_>>());
        hm_transition_free(p);
        hm_hypergraph_free(h);

        let missing = CString::new(dir.path().join("none.jsonl").to_str().unwrap()).unwrap();
        let mut h = ptr::null_mut();
        assert_eq!(hm_hypergraph_load(missing.as_ptr(), &mut h), HmStatus::Io);
        assert!(h.is_null());
    }
}

#[test]
fn failures_set_status_and_message() {
    unsafe {
        let mut h = ptr::null_mut();
        let status = hm_hypergraph_new(3, 1, ptr::null(), ptr::null(), ptr::null(), &mut h);
        assert_eq!(status, HmStatus::NullPointer);
        assert!(last_error().contains("offsets"));

        let offsets = [0usize, 2, 1];
        let vertices = [0usize, 1];
        let status = hm_hypergraph_new(
            3,
            2,
            offsets.as_ptr(),
            vertices.as_ptr(),
            ptr::null(),
            &mut h,
        );
        assert_eq!(status, HmStatus::InvalidInput);

        // vertex 3 is out of range
        let offsets = [0usize, 2];
        let vertices = [0usize, 3];
        let status = hm_hypergraph_new(
            3,
            1,
            offsets.as_ptr(),
            vertices.as_ptr(),
            ptr::null(),
            &mut h,
        );
        assert_eq!(status, HmStatus::InvalidInput);

        let h = skewed();
        assert_eq!(
            hm_hypergraph_set_edvw(h, [1.0; 4].as_ptr(), 4),
            HmStatus::InvalidInput
        );
        let mut d = [0.0; 2];
        assert_eq!(
            hm_hypergraph_vertex_degrees(h, d.as_mut_ptr(), 2),
            HmStatus::BufferTooSmall
        );
        assert!(last_error().contains("3 needed"));

        let mut p = ptr::null_mut();
        ok(hm_transition_new(h, HmWalkKind::Zhou, &mut p));
        let mut l = ptr::null_mut();
        let status = hm_laplacian_new(p, -0.1, HmLaplacianForm::Normalized, false, &mut l);
        assert_eq!(status, HmStatus::InvalidInput);
        assert!(l.is_null());
        let mut asymmetric = [0.0; 9];
        asymmetric[1] = 0.2;
        let status = hm_laplacian_with_charges(
            p,
            asymmetric.as_ptr(),
            HmLaplacianForm::Normalized,
            false,
            &mut l,
        );
        assert_eq!(status, HmStatus::InvalidInput);
        hm_transition_free(p);
        hm_hypergraph_free(h);

        // two components
        let offsets = [0usize, 2, 4];
        let vertices = [0usize, 1, 2, 3];
        let mut split = ptr::null_mut();
        ok(hm_hypergraph_new(
            4,
            2,
            offsets.as_ptr(),
            vertices.as_ptr(),
            ptr::null(),
            &mut split,
        ));
        let mut p = ptr::null_mut();
        ok(hm_transition_new(split, HmWalkKind::Zhou, &mut p));
        let mut pi = [0.0; 4];
        assert_eq!(
            hm_transition_stationary(p, true, pi.as_mut_ptr(), 4),
            HmStatus::Reducible
        );
        hm_transition_free(p);
        hm_hypergraph_free(split);

        let swap = [0.0, 1.0, 1.0, 0.0];
        let mut p = ptr::null_mut();
        ok(hm_transition_from_dense(2, swap.as_ptr(), &mut p));
        let mut pi = [0.0; 2];
        assert_eq!(
            hm_transition_stationary(p, false, pi.as_mut_ptr(), 2),
            HmStatus::Periodic
        );
        ok(hm_transition_stationary(p, true, pi.as_mut_ptr(), 2));
        assert!((pi[0] - 0.5).abs() < 1e-12);
        hm_transition_free(p);

        let bad = [0.5, 0.4, 0.0, 1.0];
        let mut p = ptr::null_mut();
        assert_eq!(
            hm_transition_from_dense(2, bad.as_ptr(), &mut p),
            HmStatus::InvalidInput
        );

        let mut n = 0;
        assert_eq!(hm_transition_n(ptr::null(), &mut n), HmStatus::NullPointer);
        hm_hypergraph_free(ptr::null_mut());
        hm_transition_free(ptr::null_mut());
        hm_laplacian_free(ptr::null_mut());
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(hm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
