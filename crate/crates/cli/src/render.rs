//! Debug rasters of the range image.

use std::io::Cursor;

use anyhow::Result;
use image::{GrayImage, ImageFormat, Luma, Rgb, RgbImage};
use lidar_forge::{classes, PointCloud, Provenance, RangeImage, SensorModel, Source};

const SCENE: [u8; 3] = [230, 90, 60];
const PARTNER: [u8; 3] = [60, 140, 230];
const INSTANCE: [u8; 3] = [90, 210, 90];

fn provenance_color(source: Source) -> [u8; 3] {
    match source {
        Source::Scene => SCENE,
        Source::Partner => PARTNER,
        Source::Instance(_) => INSTANCE,
    }
}

/// Grayscale min range per cell: nearest is brightest (255), farthest 1, empty 0.
pub fn range_image(cloud: &PointCloud<f32>, sensor: &SensorModel) -> GrayImage {
    let raster = RangeImage::build(cloud, sensor, Source::Scene).min_range_raster();
    let (lo, hi) = raster
        .iter()
        .flatten()
        .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let span = hi - lo;
    let mut img = GrayImage::new(sensor.width() as u32, sensor.height() as u32);
    for (i, r) in raster.iter().enumerate() {
        if let Some(r) = r {
            let t = if span > 0.0 { (r - lo) / span } else { 0.0 };
            let v = 255 - (254.0 * t).round() as u8;
            let c = sensor.cell_from_linear(i);
            img.put_pixel(c.col as u32, c.row as u32, Luma([v]));
        }
    }
    img
}

/// Colors each cell by a property of its nearest point.
fn nearest_colored(cloud: &PointCloud<f32>, sensor: &SensorModel, color: impl Fn(usize) -> [u8; 3]) -> RgbImage {
    let ri = RangeImage::build(cloud, sensor, Source::Scene);
    let mut img = RgbImage::new(sensor.width() as u32, sensor.height() as u32);
    for (linear, entries) in ri.occupied() {
        let c = sensor.cell_from_linear(linear);
        img.put_pixel(c.col as u32, c.row as u32, Rgb(color(entries[0].ordinal as usize)));
    }
    img
}

pub fn class_image(cloud: &PointCloud<f32>, sensor: &SensorModel) -> Option<RgbImage> {
    let labels = cloud.labels()?;
    Some(nearest_colored(cloud, sensor, |i| classes::color(labels[i].semantic_class)))
}

pub fn provenance_image(cloud: &PointCloud<f32>, provenance: &[Provenance], sensor: &SensorModel) -> RgbImage {
    nearest_colored(cloud, sensor, |i| provenance_color(provenance[i].source))
}

pub fn encode_png(img: &image::DynamicImage) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)?;
    Ok(buf.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lidar_forge::Point;

    #[test]
    fn empty_cloud_is_black() {
        let sensor = SensorModel::default();
        let img = range_image(&PointCloud::default(), &sensor);
        assert_eq!((img.width(), img.height()), (2048, 64));
        assert!(img.pixels().all(|p| p.0[0] == 0));
    }

    #[test]
    fn single_point_lights_one_pixel() {
        let sensor = SensorModel::default();
        let cloud: PointCloud<f32> = vec![Point::new(10.0, 0.0, -1.0, 0.0)].into_iter().collect();
        let img = range_image(&cloud, &sensor);
        let lit: Vec<_> = img.enumerate_pixels().filter(|(_, _, p)| p.0[0] != 0).collect();
        assert_eq!(lit.len(), 1);
        assert_eq!(lit[0].2 .0[0], 255);
        let (cell, _) = sensor.locate(10.0f32, 0.0, -1.0).unwrap();
        assert_eq!((lit[0].1 as usize, lit[0].0 as usize), (cell.row, cell.col));
    }

    #[test]
    fn near_is_bright_far_is_dim() {
        let sensor = SensorModel::default();
        let cloud: PointCloud<f32> =
            vec![Point::new(5.0, 0.0, -1.0, 0.0), Point::new(0.0, 50.0, -1.0, 0.0)].into_iter().collect();
        let mut values: Vec<u8> = range_image(&cloud, &sensor).pixels().map(|p| p.0[0]).filter(|&v| v > 0).collect();
        values.sort();
        assert_eq!(values, [1, 255]);
    }

    #[test]
    fn provenance_regions_are_distinct() {
        let sensor = SensorModel::default();
        let cloud: PointCloud<f32> =
            vec![Point::new(5.0, 0.0, -1.0, 0.0), Point::new(0.0, 5.0, -1.0, 0.0)].into_iter().collect();
        let prov = [Provenance::new(Source::Scene, 0), Provenance::new(Source::Partner, 0)];
        let img = provenance_image(&cloud, &prov, &sensor);
        let colors: Vec<[u8; 3]> = img.pixels().map(|p| p.0).filter(|c| *c != [0, 0, 0]).collect();
        assert_eq!(colors.len(), 2);
        assert!(colors.contains(&SCENE) && colors.contains(&PARTNER));
    }
}
