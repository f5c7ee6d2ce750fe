import java.util.Vector;

public class VectorSwap {
    public static void swap(Vector<Integer> v, int i, int j) {
        try {
            int first = v.get(i);
            int second = v.get(j);
            v.set(i, second);
            v.set(j, first);
        } catch (ArrayIndexOutOfBoundsException e) {
            System.out.println("Index out of bounds: " + e.getMessage());
        }
    }
}
