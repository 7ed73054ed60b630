//! Decoding through the `gif` crate, an implementation independent of ours.

use gif::{ColorOutput, DecodeOptions, Repeat};

#[derive(Debug)]
pub struct DecodedGif {
    pub width: usize,
    pub height: usize,
    pub repeat: Repeat,
    pub delays: Vec<u16>,
    /// Per frame, the RGB colour of every pixel looked up in the global palette.
    pub frames: Vec<Vec<[u8; 3]>>,
}

pub fn decode(bytes: &[u8]) -> DecodedGif {
    let mut opts = DecodeOptions::new();
    opts.set_color_output(ColorOutput::Indexed);
    let mut dec = opts.read_info(bytes).expect("valid GIF header");
    let palette = dec.global_palette().expect("global palette").to_vec();
    let (width, height) = (dec.width() as usize, dec.height() as usize);
    let mut frames = Vec::new();
    let mut delays = Vec::new();
    while let Some(f) = dec.read_next_frame().expect("valid frame") {
        assert_eq!((f.width as usize, f.height as usize), (width, height));
        assert!(f.palette.is_none());
        delays.push(f.delay);
        frames.push(
            f.buffer
                .iter()
                .map(|&k| {
                    let i = k as usize * 3;
                    [palette[i], palette[i + 1], palette[i + 2]]
                })
                .collect(),
        );
    }
    DecodedGif {
        width,
        height,
        repeat: dec.repeat(),
        delays,
        frames,
    }
}
