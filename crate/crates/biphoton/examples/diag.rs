use biphoton::compressor::{CompressorLayout, CompressorParams};
use biphoton::constants::{angular_frequency_from_nm, nm_from_angular_frequency};
use biphoton::grid::SpectralGrid;
use biphoton::materials::MaterialDb;
use biphoton::spdc::{SpdcParams, SpdcSource};

fn main() {
    let db = MaterialDb::builtin();
    let sf10 = db.get("sf10").unwrap().clone();
    let mut src = SpdcSource::calibrated(SpdcParams::default(), &db).unwrap();
    let wd = src.degenerate_frequency();
    let grid = SpectralGrid::default_for_center(wd);
    src.fit_bandwidth(117.0, &grid).unwrap();
    let pmf = src.phase_matching(&grid).unwrap();

    let layout = CompressorLayout::build(CompressorParams::signal_arm(), sf10.clone()).unwrap();
    println!("design deflection: {:.4} deg", layout.design_deflection_deg());
    let d = layout.phase_derivatives(wd).unwrap();
    println!("baseline signal arm: gd {:.1} fs, gdd {:.2} fs2, tod {:.2} fs3", d.0, d.1, d.2);

    let idler = CompressorLayout::build(CompressorParams::idler_arm(), sf10).unwrap();
    let di = idler.phase_derivatives(wd).unwrap();
    println!("baseline idler arm:  gd {:.1} fs, gdd {:.2} fs2, tod {:.2} fs3", di.0, di.1, di.2);

    // how much |Phi|^2 weight clips vs P3 withdrawal
    let total: f64 = pmf.phi_sq().iter().sum();
    for glass in [0.0f64, -3.5, -6.0, -10.5, 3.5, 10.5] {
        let ratio = layout.translator_to_glass_path(1.0, 3).unwrap();
        let moved = layout.with_insertion(3, glass / ratio).unwrap();
        let sp = moved.spectral_phase_masked(&grid).unwrap();
        let clipped_w: f64 = (0..grid.len())
            .filter(|&j| !sp.mask()[j])
            .map(|j| pmf.phi_sq()[j])
            .sum();
        // clip boundaries in wavelength
        let mut lo_nm: f64 = f64::NAN;
        let mut hi_nm: f64 = f64::NAN;
        for j in 0..grid.len() {
            if sp.mask()[j] {
                let nm = nm_from_angular_frequency(grid.frequency(j));
                if lo_nm.is_nan() || nm < lo_nm { lo_nm = nm; }
                if hi_nm.is_nan() || nm > hi_nm { hi_nm = nm; }
            }
        }
        println!(
            "P3 glass {:+.1} mm: clipped grid fraction {:.4}, |Phi|^2 weight {:.5}, passband {:.0}-{:.0} nm, gdd {:.1}",
            glass,
            sp.clipped_fraction,
            clipped_w / total,
            lo_nm,
            hi_nm,
            moved.phase_derivatives(wd).unwrap().1,
        );
    }

    // GDD budget: how much glass would zero the arm?
    let slope = {
        let ratio = layout.translator_to_glass_path(1.0, 2).unwrap();
        let m = layout.with_insertion(2, 1.0 / ratio).unwrap();
        m.phase_derivatives(wd).unwrap().1 - d.1
    };
    println!("signal slope {:.2} fs2/mm, glass to zero: {:.1} mm", slope, -d.1 / slope);
    let slope_i = {
        let ratio = idler.translator_to_glass_path(1.0, 2).unwrap();
        let m = idler.with_insertion(2, 1.0 / ratio).unwrap();
        m.phase_derivatives(wd).unwrap().1 - di.1
    };
    println!("idler  slope {:.2} fs2/mm, glass to zero: {:.1} mm", slope_i, -di.1 / slope_i);
}
